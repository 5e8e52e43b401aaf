"""Gait references, actuation coordinate maps and joint tracking.

Actuation coordinates are the six joint motors, ``q_a = [hip_L, thigh_L,
calf_L, hip_R, thigh_R, calf_R]`` as relative angles: thigh motors measure
thigh-absolute minus trunk-absolute, calf (knee) motors calf-absolute minus
thigh-absolute, and the two hip motors live in the frontal plane.  The
planar models use absolute angles with the stance leg first, so the
sagittal map S_s depends on which physical side is in stance but is a
constant matrix for a fixed assignment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "Side",
    "GaitConfig",
    "Gains",
    "UnreachableTargetError",
    "cycloid_swing",
    "leg_ik",
    "leg_fk",
    "sagittal_map_matrix",
    "sagittal_angles_to_actuation",
    "actuation_to_sagittal_angles",
    "actuation_torques_to_sagittal",
    "sagittal_torques_to_actuation",
    "frontal_to_hip_angles",
    "hip_angles_to_frontal",
    "hip_torques_to_frontal",
    "frontal_torques_to_hips",
    "track_joints",
]


class Side(str, Enum):
    LEFT = "left"
    RIGHT = "right"

    @property
    def other(self) -> "Side":
        return Side.RIGHT if self is Side.LEFT else Side.LEFT


class UnreachableTargetError(ValueError):
    """Foot target outside the reachable annulus of the two-link leg."""


@dataclass(frozen=True)
class GaitConfig:
    """Periodic gait schedule and reference geometry."""

    cycle_period: float = 0.4   # full left+right cycle [s]
    duty: float = 0.5           # stance fraction of each leg's cycle
    swing_height: float = 0.10  # apex foot clearance [m]
    v_target: float = 0.2       # commanded forward speed [m/s]
    hip_height: float = 0.34    # hip reference height above the surface [m]
    trunk_ref: float = 0.0      # trunk posture reference [rad]

    def __post_init__(self) -> None:
        if self.cycle_period <= 0.0:
            raise ValueError("cycle_period must be strictly positive")
        if not 0.0 < self.duty < 1.0:
            raise ValueError("duty must lie in (0, 1)")
        if self.swing_height <= 0.0:
            raise ValueError("swing_height must be strictly positive")
        if self.v_target < 0.0:
            raise ValueError("v_target must be non-negative")

    @property
    def stance_duration(self) -> float:
        return self.cycle_period * self.duty

    @property
    def step_length(self) -> float:
        """Spacing of consecutive footfalls, proportional to speed."""
        return self.v_target * self.stance_duration


@dataclass(frozen=True)
class Gains:
    """Per-joint PD gains and torque limit for the six actuators."""

    kp: np.ndarray = field(
        default_factory=lambda: np.array([400.0, 120.0, 50.0, 400.0, 120.0, 50.0])
    )
    kd: np.ndarray = field(
        default_factory=lambda: np.array([20.0, 4.0, 1.5, 20.0, 4.0, 1.5])
    )
    torque_limit: float = 60.0

    def __post_init__(self) -> None:
        kp = np.asarray(self.kp, dtype=float)
        kd = np.asarray(self.kd, dtype=float)
        if kp.shape != (6,) or kd.shape != (6,):
            raise ValueError("gain vectors must have six entries")
        if np.any(kp <= 0.0) or np.any(kd <= 0.0):
            raise ValueError("gains must be strictly positive")
        object.__setattr__(self, "kp", kp)
        object.__setattr__(self, "kd", kd)


def cycloid_swing(phase: float, step_length: float, swing_height: float):
    """Cycloidal swing-foot profile over phase in [0, 1].

    x(p) = L (p - sin(2 pi p) / (2 pi)),  z(p) = h (1 - cos(2 pi p)) / 2.
    Starts and ends at zero height with zero vertical velocity; the apex
    height h is reached at p = 0.5.
    """
    if not 0.0 <= phase <= 1.0:
        raise ValueError("phase must lie in [0, 1]")
    w = 2.0 * math.pi * phase
    x = step_length * (phase - math.sin(w) / (2.0 * math.pi))
    z = swing_height * (1.0 - math.cos(w)) / 2.0
    return x, z


def leg_fk(l_t: float, l_c: float, thigh: float, calf: float):
    """Foot-center position relative to the hip for absolute link angles."""
    return (
        -l_t * math.sin(thigh) - l_c * math.sin(calf),
        -l_t * math.cos(thigh) - l_c * math.cos(calf),
    )


def leg_ik(l_t: float, l_c: float, target: tuple[float, float]):
    """Absolute (thigh, calf) angles reaching a foot target below the hip.

    ``target`` is the foot-center position relative to the hip.  Uses the
    knee-backward branch; raises UnreachableTargetError outside the annulus
    |l_t - l_c| < |target| < l_t + l_c.
    """
    dx, dz = target
    r = math.hypot(dx, dz)
    if r <= abs(l_t - l_c) + 1e-12 or r >= l_t + l_c - 1e-12:
        raise UnreachableTargetError(
            f"target distance {r:.4f} m outside reachable annulus"
        )
    chi = math.atan2(-dx, -dz)  # direction of the hip-to-foot chord
    cos_dev = (l_t ** 2 + r ** 2 - l_c ** 2) / (2.0 * l_t * r)
    dev = math.acos(min(1.0, max(-1.0, cos_dev)))
    thigh = chi + dev  # knee behind the chord
    ux = -(dx + l_t * math.sin(thigh)) / l_c
    uz = -(dz + l_t * math.cos(thigh)) / l_c
    calf = math.atan2(ux, uz)
    return thigh, calf


# ---------------------------------------------------------------------------
# actuation <-> model coordinate maps
# ---------------------------------------------------------------------------

def _sagittal_rows(stance: Side):
    """Actuator indices (thigh, calf) for the stance and swing legs."""
    if stance is Side.LEFT:
        return (1, 2), (4, 5)
    return (4, 5), (1, 2)


def sagittal_map_matrix(stance: Side) -> np.ndarray:
    """Constant matrix S with q_a = S q_s for the 5 sagittal angles.

    q_s = [stance thigh, stance calf, swing thigh, swing calf, trunk]
    (absolute); hip actuator rows are zero (frontal-plane joints).
    """
    s = np.zeros((6, 5))
    (st_t, st_c), (sw_t, sw_c) = _sagittal_rows(stance)
    s[st_t, 0] = 1.0
    s[st_t, 4] = -1.0
    s[st_c, 0] = -1.0
    s[st_c, 1] = 1.0
    s[sw_t, 2] = 1.0
    s[sw_t, 4] = -1.0
    s[sw_c, 2] = -1.0
    s[sw_c, 3] = 1.0
    return s


def sagittal_angles_to_actuation(q_s: np.ndarray, stance: Side) -> np.ndarray:
    """Relative actuator angles from the five absolute sagittal angles."""
    q_s = np.asarray(q_s, dtype=float)
    return sagittal_map_matrix(stance) @ q_s


def actuation_to_sagittal_angles(q_a: np.ndarray, trunk: float, stance: Side) -> np.ndarray:
    """Absolute sagittal angles from actuator angles, given the trunk angle."""
    q_a = np.asarray(q_a, dtype=float)
    (st_t, st_c), (sw_t, sw_c) = _sagittal_rows(stance)
    thigh_st = q_a[st_t] + trunk
    calf_st = q_a[st_c] + thigh_st
    thigh_sw = q_a[sw_t] + trunk
    calf_sw = q_a[sw_c] + thigh_sw
    return np.array([thigh_st, calf_st, thigh_sw, calf_sw, trunk])


def actuation_torques_to_sagittal(tau_a: np.ndarray, stance: Side) -> np.ndarray:
    """Generalized torques on the four actuated sagittal coordinates.

    tau_s_i = sum_j (dq_a_j / dq_s_i) tau_a_j restricted to the actuated
    rows (the trunk row is not actuated).
    """
    tau_a = np.asarray(tau_a, dtype=float)
    full = sagittal_map_matrix(stance).T @ tau_a
    return full[:4]


def sagittal_torques_to_actuation(tau_s: np.ndarray, stance: Side) -> np.ndarray:
    """Actuator torques realizing given sagittal generalized torques."""
    tau_s = np.asarray(tau_s, dtype=float)
    (st_t, st_c), (sw_t, sw_c) = _sagittal_rows(stance)
    tau_a = np.zeros(6)
    tau_a[st_t] = tau_s[0] + tau_s[1]
    tau_a[st_c] = tau_s[1]
    tau_a[sw_t] = tau_s[2] + tau_s[3]
    tau_a[sw_c] = tau_s[3]
    return tau_a


def frontal_to_hip_angles(q_f: np.ndarray) -> tuple[float, float]:
    """Hip actuator angles (q1, q4) from the frontal absolute angles.

    q1 = -p1 + p2 and q4 = pi - p2 + p3.
    """
    p1, p2, p3 = float(q_f[0]), float(q_f[1]), float(q_f[2])
    return -p1 + p2, math.pi - p2 + p3


def hip_angles_to_frontal(q1: float, q4: float, p1: float) -> np.ndarray:
    """Frontal absolute angles from the hip actuators, given the lean p1."""
    p2 = q1 + p1
    p3 = q4 - math.pi + p2
    return np.array([p1, p2, p3])


def hip_torques_to_frontal(tau1: float, tau4: float) -> tuple[float, float]:
    """Frontal generalized torques: tau_f2 = tau1 - tau4, tau_f3 = tau4."""
    return tau1 - tau4, tau4


def frontal_torques_to_hips(tau_f2: float, tau_f3: float) -> tuple[float, float]:
    """Hip actuator torques realizing given frontal generalized torques."""
    return tau_f2 + tau_f3, tau_f3


def track_joints(
    q_ref: np.ndarray,
    dq_ref: np.ndarray,
    q: np.ndarray,
    dq: np.ndarray,
    gains: Gains,
) -> np.ndarray:
    """PD joint tracking torque, saturated at the configured limit."""
    q_ref = np.asarray(q_ref, dtype=float)
    dq_ref = np.asarray(dq_ref, dtype=float)
    q = np.asarray(q, dtype=float)
    dq = np.asarray(dq, dtype=float)
    tau = gains.kp * (q_ref - q) + gains.kd * (dq_ref - dq)
    return np.clip(tau, -gains.torque_limit, gains.torque_limit)
