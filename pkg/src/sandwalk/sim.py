"""Walking simulation: phase-switched time stepping with intrusion bookkeeping.

World layout: x forward, z up, y lateral; the sand surface sits at
``terrain.sand_level``.  During a stance the contact anchor is
``C0 + (x_s, z)`` from the latched initial contact C0 and the dynamic
intrusion coordinates; the foot center of the semi-cylindrical sole sits a
radius above the anchor, and the hip follows by forward kinematics through
the stance leg.  The posture coordinates (sagittal trunk, frontal lean and
crossbar) are held at their references by a reduced constrained solve,
standing in for the whole-body controller of the physical robot; all other
coordinates integrate their forward dynamics under PD joint tracking.

Granular mode drives the intrusion rows with the resistive terrain forces;
rigid mode clamps the intrusion coordinates and reads the required
constraint forces back off those rows.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import dynamics as dyn
from . import gait as gt
from . import rolling as rl
from . import terrain as tr

__all__ = [
    "SimConfig",
    "SimRecord",
    "Trajectory",
    "WalkerState",
    "DivergenceError",
    "detect_touchdown",
    "surface_crossings",
    "initial_state",
    "step",
    "run",
    "integrate_free",
]


class DivergenceError(RuntimeError):
    """State magnitude exceeded the divergence guard."""

    def __init__(self, t: float, detail: str = ""):
        super().__init__(f"simulation diverged at t={t:.6f} s {detail}".rstrip())
        self.t = t


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    duration: float = 2.4
    integrator: str = "semi_implicit"      # or "rk4"
    terrain_mode: str = "granular"         # or "rigid"
    decimation: int = 1
    seed: int = 0
    initial_jitter: float = 2e-3           # seeded initial joint offset [rad]
    foot_radius: float = 0.04
    h_com: float = 0.40                    # CoM height used for dimensionless speed [m]
    r_eff_cap: float = 10.0                # effective-radius saturation for logs [m]
    divergence_limit: float = 1e6
    gait: gt.GaitConfig = field(default_factory=gt.GaitConfig)
    terrain: tr.TerrainParams = field(default_factory=tr.TerrainParams)
    sagittal: dyn.SagittalParams = field(default_factory=dyn.SagittalParams)
    frontal: dyn.FrontalParams = field(default_factory=dyn.FrontalParams)
    gains: gt.Gains = field(default_factory=gt.Gains)

    def __post_init__(self) -> None:
        if self.dt <= 0.0:
            raise ValueError("dt must be strictly positive")
        if self.duration < self.gait.cycle_period:
            raise ValueError("duration must cover at least one gait cycle")
        if self.integrator not in ("semi_implicit", "rk4"):
            raise ValueError(f"unknown integrator '{self.integrator}'")
        if self.terrain_mode not in ("granular", "rigid"):
            raise ValueError(f"unknown terrain mode '{self.terrain_mode}'")
        if self.decimation < 1:
            raise ValueError("decimation must be >= 1")


# record layout; order is the stable CSV column order
SIM_RECORD_FIELDS = [
    "t", "stance_leg", "stance_phase", "step_count",
    "q_s1", "q_s2", "q_s3", "q_s4", "q_s5",
    "dq_s1", "dq_s2", "dq_s3", "dq_s4", "dq_s5",
    "x_s", "y_s", "z_s", "dx_s", "dy_s", "dz_s",
    "q_f1", "q_f2", "q_f3", "dq_f1", "dq_f2", "dq_f3",
    "tau_a1", "tau_a2", "tau_a3", "tau_a4", "tau_a5", "tau_a6",
    "f_x", "f_y", "f_z",
    "theta_r", "delta_theta_r", "gamma", "r_eff",
    "power", "power_abs_joints", "power_s", "power_f",
    "com_x", "com_z", "com_vx", "com_vz", "hip_x", "hip_z",
]


@dataclass
class SimRecord:
    t: float = 0.0
    stance_leg: str = "left"
    stance_phase: float = 0.0
    step_count: int = 0
    q_s1: float = 0.0
    q_s2: float = 0.0
    q_s3: float = 0.0
    q_s4: float = 0.0
    q_s5: float = 0.0
    dq_s1: float = 0.0
    dq_s2: float = 0.0
    dq_s3: float = 0.0
    dq_s4: float = 0.0
    dq_s5: float = 0.0
    x_s: float = 0.0
    y_s: float = 0.0
    z_s: float = 0.0      # sinkage depth, positive down
    dx_s: float = 0.0
    dy_s: float = 0.0
    dz_s: float = 0.0     # sinking rate, positive down
    q_f1: float = 0.0
    q_f2: float = 0.0
    q_f3: float = 0.0
    dq_f1: float = 0.0
    dq_f2: float = 0.0
    dq_f3: float = 0.0
    tau_a1: float = 0.0
    tau_a2: float = 0.0
    tau_a3: float = 0.0
    tau_a4: float = 0.0
    tau_a5: float = 0.0
    tau_a6: float = 0.0
    f_x: float = 0.0
    f_y: float = 0.0
    f_z: float = 0.0
    theta_r: float = 0.0
    delta_theta_r: float = 0.0
    gamma: float = float("nan")
    r_eff: float = 0.0
    power: float = 0.0
    power_abs_joints: float = 0.0
    power_s: float = 0.0
    power_f: float = 0.0
    com_x: float = 0.0
    com_z: float = 0.0
    com_vx: float = 0.0
    com_vz: float = 0.0
    hip_x: float = 0.0
    hip_z: float = 0.0


@dataclass
class Trajectory:
    records: list[SimRecord]
    meta: dict

    def column(self, name: str) -> np.ndarray:
        if name not in SIM_RECORD_FIELDS:
            raise KeyError(f"unknown trajectory field '{name}'")
        if name == "stance_leg":
            raise KeyError("stance_leg is not numeric")
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    def save_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(SIM_RECORD_FIELDS) + "\n")
            for r in self.records:
                vals = []
                for name in SIM_RECORD_FIELDS:
                    v = getattr(r, name)
                    if name == "stance_leg":
                        vals.append(v)
                    elif name == "step_count":
                        vals.append(str(int(v)))
                    else:
                        vals.append(repr(float(v)))
                fh.write(",".join(vals) + "\n")

    def save_json(self, path) -> None:
        def cell(value):
            if isinstance(value, float) and not math.isfinite(value):
                return None  # strict JSON has no NaN
            return value

        payload = {
            "meta": self.meta,
            "columns": SIM_RECORD_FIELDS,
            "records": [
                [cell(getattr(r, name)) for name in SIM_RECORD_FIELDS]
                for r in self.records
            ],
        }
        with open(path, "w") as fh:
            json.dump(payload, fh)

    @classmethod
    def load_csv(cls, path) -> "Trajectory":
        with open(path, newline="") as fh:
            header = fh.readline().strip().split(",")
            if header != SIM_RECORD_FIELDS:
                raise ValueError(f"{path}: unexpected trajectory header")
            records = []
            for line in fh:
                parts = line.rstrip("\n").split(",")
                kwargs = {}
                for name, raw in zip(SIM_RECORD_FIELDS, parts):
                    if name == "stance_leg":
                        kwargs[name] = raw
                    elif name == "step_count":
                        kwargs[name] = int(raw)
                    else:
                        kwargs[name] = float(raw)
                records.append(SimRecord(**kwargs))
        return cls(records=records, meta={"source": str(path)})


@dataclass
class WalkerState:
    """Full mutable simulation state."""

    t: float = 0.0
    stance: gt.Side = gt.Side.LEFT
    t_stance_start: float = 0.0
    step_count: int = 0
    c0: np.ndarray = field(default_factory=lambda: np.zeros(2))
    theta_r0: float = 0.0
    liftoff: np.ndarray = field(default_factory=lambda: np.zeros(2))
    prev_swing_height: float = float("inf")
    line_x0: float = 0.0        # origin of the commanded-progress line
    r_latch: float = 0.0        # stance leg chord latched at touchdown [m]
    q_s: np.ndarray = field(default_factory=lambda: np.zeros(7))
    dq_s: np.ndarray = field(default_factory=lambda: np.zeros(7))
    q_f: np.ndarray = field(default_factory=lambda: np.zeros(5))
    dq_f: np.ndarray = field(default_factory=lambda: np.zeros(5))


def detect_touchdown(prev_height: float, height: float, sand_level: float = 0.0) -> bool:
    """True when the swing-foot height crosses the surface downward."""
    return prev_height > sand_level >= height


def surface_crossings(heights, sand_level: float = 0.0):
    """(index, direction) for every crossing in a height series."""
    events = []
    for i in range(1, len(heights)):
        if heights[i - 1] > sand_level >= heights[i]:
            events.append((i, "down"))
        elif heights[i - 1] <= sand_level < heights[i]:
            events.append((i, "up"))
    return events


# ---------------------------------------------------------------------------
# kinematic helpers (world frame)
# ---------------------------------------------------------------------------

def _u(theta: float) -> np.ndarray:
    return np.array([math.sin(theta), math.cos(theta)])


def _du(theta: float, dtheta: float) -> np.ndarray:
    return np.array([math.cos(theta), -math.sin(theta)]) * dtheta


def _anchor(ws: WalkerState) -> np.ndarray:
    return ws.c0 + ws.q_s[5:7]


def _hip(ws: WalkerState, cfg: SimConfig) -> np.ndarray:
    p = cfg.sagittal
    center = _anchor(ws) + np.array([0.0, cfg.foot_radius])
    return center + p.l_c * _u(ws.q_s[1]) + p.l_t * _u(ws.q_s[0])


def _hip_vel(ws: WalkerState, cfg: SimConfig) -> np.ndarray:
    p = cfg.sagittal
    return (
        ws.dq_s[5:7]
        + p.l_c * _du(ws.q_s[1], ws.dq_s[1])
        + p.l_t * _du(ws.q_s[0], ws.dq_s[0])
    )


def _swing_center(ws: WalkerState, cfg: SimConfig) -> np.ndarray:
    p = cfg.sagittal
    return _hip(ws, cfg) - p.l_t * _u(ws.q_s[2]) - p.l_c * _u(ws.q_s[3])


def _swing_center_vel(ws: WalkerState, cfg: SimConfig) -> np.ndarray:
    p = cfg.sagittal
    return (
        _hip_vel(ws, cfg)
        - p.l_t * _du(ws.q_s[2], ws.dq_s[2])
        - p.l_c * _du(ws.q_s[3], ws.dq_s[3])
    )


def _com(ws: WalkerState, cfg: SimConfig):
    """Whole-robot CoM position and velocity from forward kinematics."""
    p = cfg.sagittal
    hip = _hip(ws, cfg)
    hip_v = _hip_vel(ws, cfg)
    q, dq = ws.q_s, ws.dq_s
    total = p.m_b + 2.0 * p.m_t + 2.0 * p.m_c
    pos = p.m_b * (hip + p.l_b * _u(q[4]))
    vel = p.m_b * (hip_v + p.l_b * _du(q[4], dq[4]))
    for thigh, calf in ((0, 1), (2, 3)):
        pos += p.m_t * (hip - p.a_1 * _u(q[thigh]))
        vel += p.m_t * (hip_v - p.a_1 * _du(q[thigh], dq[thigh]))
        pos += p.m_c * (hip - p.l_t * _u(q[thigh]) - p.a_2 * _u(q[calf]))
        vel += p.m_c * (
            hip_v - p.l_t * _du(q[thigh], dq[thigh]) - p.a_2 * _du(q[calf], dq[calf])
        )
    return pos / total, vel / total


def _ik_clamped(l_t: float, l_c: float, target):
    """Leg IK with the target radius clamped into the reachable annulus."""
    dx, dz = target
    r = math.hypot(dx, dz)
    r_max = (l_t + l_c) * (1.0 - 1e-4)
    r_min = abs(l_t - l_c) * (1.0 + 1e-4) + 1e-6
    if r < 1e-12:
        raise gt.UnreachableTargetError("foot target coincides with the hip")
    if r > r_max or r < r_min:
        s = min(max(r, r_min), r_max) / r
        dx, dz = dx * s, dz * s
    return gt.leg_ik(l_t, l_c, (dx, dz))


# ---------------------------------------------------------------------------
# references and control
# ---------------------------------------------------------------------------

def _nominal_chord(cfg: SimConfig) -> float:
    """Design vault chord: hip reference height over the foot center."""
    r = cfg.gait.hip_height - cfg.foot_radius
    r_max = (cfg.sagittal.l_t + cfg.sagittal.l_c) * 0.999
    return min(max(r, 0.2 * r_max), r_max)


def _model_refs(ws: WalkerState, cfg: SimConfig, t: float) -> np.ndarray:
    """Reference absolute angles [stance thigh, stance calf, swing thigh,
    swing calf, trunk] at time t.

    The stance hip reference tracks the commanded-velocity line in x (so
    contact slip is absorbed instead of re-vaulted) and recovers the leg
    chord toward its nominal length relative to the estimated contact (so
    per-step sinkage is regained without accumulating a crouch).  The swing
    foot tracks the cycloid between world-frame footfall targets planned
    against the nominal surface-level geometry.
    """
    p = cfg.sagittal
    g = cfg.gait
    surface = cfg.terrain.sand_level
    t_half = g.stance_duration
    phase = min(max((t - ws.t_stance_start) / t_half, 0.0), 1.0)
    length = g.step_length
    r_nom = _nominal_chord(cfg)
    line_x = ws.line_x0 + g.v_target * t

    # stance leg: vault the hip along the line over the estimated contact
    center = np.array(
        [ws.c0[0] + ws.q_s[5], ws.c0[1] + ws.q_s[6] + cfg.foot_radius]
    )
    u = min(phase / 0.6, 1.0)
    s_rec = u * u * (3.0 - 2.0 * u)  # C1 chord-recovery schedule
    r_ref = ws.r_latch + s_rec * (r_nom - ws.r_latch)
    dx = line_x - center[0]
    dx = min(max(dx, -0.55 * r_ref), 0.55 * r_ref)
    hip_st = np.array([center[0] + dx, center[1] + math.sqrt(r_ref ** 2 - dx ** 2)])
    st_t, st_c = _ik_clamped(p.l_t, p.l_c, center - hip_st)

    # swing leg: cycloid from the latched liftoff point to the landing target
    hip_ref = np.array([line_x, surface + cfg.foot_radius + r_nom])
    land = np.array(
        [ws.line_x0 + g.v_target * (ws.t_stance_start + t_half) + 0.5 * length,
         surface + cfg.foot_radius]
    )
    travel = land[0] - ws.liftoff[0]
    cx, cz = gt.cycloid_swing(phase, travel, g.swing_height)
    blend = phase * phase * (3.0 - 2.0 * phase)  # C1 blend of endpoint heights
    target = np.array(
        [ws.liftoff[0] + cx, (1.0 - blend) * ws.liftoff[1] + blend * land[1] + cz]
    )
    sw_t, sw_c = _ik_clamped(p.l_t, p.l_c, target - hip_ref)

    return np.array([st_t, st_c, sw_t, sw_c, g.trunk_ref])


_FRONTAL_POSTURE = np.array([0.0, math.pi / 2.0, 0.0])


def _actuation_refs(ws: WalkerState, cfg: SimConfig):
    """Actuator reference angles and rates (schedule rate, geometry frozen)."""
    delta = 1e-5
    ref_now = _model_refs(ws, cfg, ws.t)
    ref_prev = _model_refs(ws, cfg, ws.t - delta)
    q_ref = gt.sagittal_angles_to_actuation(ref_now, ws.stance)
    dq_ref = gt.sagittal_angles_to_actuation((ref_now - ref_prev) / delta, ws.stance)
    hip_st, hip_sw = gt.frontal_to_hip_angles(_FRONTAL_POSTURE)
    i_st, i_sw = (0, 3) if ws.stance is gt.Side.LEFT else (3, 0)
    q_ref[i_st] = hip_st
    q_ref[i_sw] = hip_sw
    dq_ref[i_st] = 0.0
    dq_ref[i_sw] = 0.0
    return q_ref, dq_ref


def _measured_actuation(ws: WalkerState):
    q_a = gt.sagittal_angles_to_actuation(ws.q_s[:5], ws.stance)
    dq_a = gt.sagittal_angles_to_actuation(ws.dq_s[:5], ws.stance)
    hip_st, hip_sw = gt.frontal_to_hip_angles(ws.q_f[:3])
    dhip_st = -ws.dq_f[0] + ws.dq_f[1]
    dhip_sw = -ws.dq_f[1] + ws.dq_f[2]
    i_st, i_sw = (0, 3) if ws.stance is gt.Side.LEFT else (3, 0)
    q_a[i_st], q_a[i_sw] = hip_st, hip_sw
    dq_a[i_st], dq_a[i_sw] = dhip_st, dhip_sw
    return q_a, dq_a


def _control(ws: WalkerState, cfg: SimConfig):
    """PD torques in actuation space and their planar-model images."""
    q_ref, dq_ref = _actuation_refs(ws, cfg)
    q_a, dq_a = _measured_actuation(ws)
    tau_a = gt.track_joints(q_ref, dq_ref, q_a, dq_a, cfg.gains)
    tau_s = gt.actuation_torques_to_sagittal(tau_a, ws.stance)
    i_st, i_sw = (0, 3) if ws.stance is gt.Side.LEFT else (3, 0)
    tau_f = np.array(gt.hip_torques_to_frontal(tau_a[i_st], tau_a[i_sw]))
    return tau_a, dq_a, tau_s, tau_f


# ---------------------------------------------------------------------------
# dynamics right-hand side
# ---------------------------------------------------------------------------

_SAG_FREE = [0, 1, 2, 3, 5, 6]   # trunk row held
_FRONT_FREE = [2, 3]             # lean and crossbar rows held, vertical imposed


_DIRECTION_FLOOR = 0.05  # m/s; regularizes the stress direction switch at rest


def _grf_granular(ws: WalkerState, cfg: SimConfig):
    depth = max(0.0, -float(ws.q_s[6]))
    dx = float(ws.dq_s[5])
    dz = float(ws.dq_s[6])
    gamma = rl.velocity_angle(dx, dz)
    # Smooth the wedge-face orientation switch across zero horizontal rate:
    # evaluate both leading-face directions and blend by the horizontal
    # fraction, which removes the rest-state force discontinuity.
    hyp = math.hypot(dx, _DIRECTION_FLOOR)
    w = 0.5 * (1.0 + dx / hyp)
    kin = tr.IntrusionKinematics(
        depth=depth,
        gamma=math.atan2(dz, hyp),
        v_sagittal=(dx, dz),
        v_frontal=(float(ws.dq_f[3]), dz),
        y_slip=float(ws.q_f[3]),
    )
    fwd = tr.sagittal_forces(cfg.terrain, kin)
    kin.gamma = math.atan2(dz, -hyp)
    bwd = tr.sagittal_forces(cfg.terrain, kin)
    grf = dyn.GrfSagittal(
        f_x=w * fwd.f_x + (1.0 - w) * bwd.f_x,
        f_z=w * fwd.f_z + (1.0 - w) * bwd.f_z,
    )
    f_y = tr.lateral_force(cfg.terrain, kin)
    return grf, f_y, gamma, depth


def _accelerations(ws: WalkerState, cfg: SimConfig, tau_s, tau_f):
    """Reduced constrained accelerations plus ground reaction forces."""
    sag_state = dyn.SagittalState(ws.q_s, ws.dq_s)
    d_s, c_s, g_s = dyn.assemble_sagittal(cfg.sagittal, sag_state)
    rhs_s = -c_s @ ws.dq_s - g_s
    rhs_s[:4] += tau_s

    qdd_s = np.zeros(7)
    if cfg.terrain_mode == "granular":
        grf, f_y, gamma, depth = _grf_granular(ws, cfg)
        rhs_s[5] += grf.f_x
        rhs_s[6] += grf.f_z
        idx = _SAG_FREE
        qdd_s[idx] = np.linalg.solve(d_s[np.ix_(idx, idx)], rhs_s[idx])
        f_x, f_z = grf.f_x, grf.f_z
    else:
        idx = [0, 1, 2, 3]
        qdd_s[idx] = np.linalg.solve(d_s[np.ix_(idx, idx)], rhs_s[idx])
        resid = d_s @ qdd_s + c_s @ ws.dq_s + g_s
        f_x = float(resid[5])
        f_z = float(resid[6])
        f_y = 0.0
        gamma = 0.0
        depth = 0.0

    # frontal plane: lean and crossbar posture-held, swing-leg angle and
    # lateral slip dynamic; the crossbar row residual is the holding torque
    fr_state = dyn.FrontalState(ws.q_f, ws.dq_f)
    d_f, c_f, g_f = dyn.assemble_frontal(cfg.frontal, fr_state)
    rhs_f = -c_f @ ws.dq_f - g_f
    rhs_f[2] += tau_f[1]
    qdd_f = np.zeros(5)
    if cfg.terrain_mode == "granular":
        rhs_f[3] += f_y
        zdd = qdd_s[6]
        idx_f = _FRONT_FREE
        rhs_sub = rhs_f[idx_f] - d_f[np.ix_(idx_f, [4])].ravel() * zdd
        qdd_f[idx_f] = np.linalg.solve(d_f[np.ix_(idx_f, idx_f)], rhs_sub)
        qdd_f[4] = zdd
    else:
        qdd_f[2] = rhs_f[2] / d_f[2, 2]
        resid = d_f @ qdd_f + c_f @ ws.dq_f + g_f
        f_y = float(resid[3])
    # crossbar holding torque (reported as the hip-pair torque demand)
    tau_bar = float((d_f @ qdd_f + c_f @ ws.dq_f + g_f)[1])

    return qdd_s, qdd_f, f_x, f_y, f_z, gamma, depth, tau_bar


def _integrate(ws: WalkerState, cfg: SimConfig, tau_s, tau_f):
    dt = cfg.dt
    if cfg.integrator == "semi_implicit":
        qdd_s, qdd_f, *forces = _accelerations(ws, cfg, tau_s, tau_f)
        ws.dq_s += qdd_s * dt
        ws.q_s += ws.dq_s * dt
        ws.dq_f += qdd_f * dt
        ws.q_f += ws.dq_f * dt
    else:  # rk4 with torques held over the step
        def deriv(q_s, dq_s, q_f, dq_f):
            probe = copy.copy(ws)
            probe.q_s, probe.dq_s, probe.q_f, probe.dq_f = q_s, dq_s, q_f, dq_f
            qdd_s, qdd_f, *_ = _accelerations(probe, cfg, tau_s, tau_f)
            return dq_s, qdd_s, dq_f, qdd_f

        y = (ws.q_s, ws.dq_s, ws.q_f, ws.dq_f)
        k1 = deriv(*y)
        k2 = deriv(*(y[i] + 0.5 * dt * k1[i] for i in range(4)))
        k3 = deriv(*(y[i] + 0.5 * dt * k2[i] for i in range(4)))
        k4 = deriv(*(y[i] + dt * k3[i] for i in range(4)))
        ws.q_s = y[0] + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        ws.dq_s = y[1] + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        ws.q_f = y[2] + dt / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        ws.dq_f = y[3] + dt / 6.0 * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3])
        qdd_s, qdd_f, *forces = _accelerations(ws, cfg, tau_s, tau_f)
    # posture holds and mode clamps
    ws.q_s[4] = cfg.gait.trunk_ref
    ws.dq_s[4] = 0.0
    ws.q_f[0] = 0.0
    ws.dq_f[0] = 0.0
    ws.q_f[1] = math.pi / 2.0
    ws.dq_f[1] = 0.0
    if cfg.terrain_mode == "rigid":
        ws.q_s[5:7] = 0.0
        ws.dq_s[5:7] = 0.0
        ws.q_f[3] = 0.0
        ws.dq_f[3] = 0.0
    # frontal vertical coordinate mirrors the sagittal one
    ws.q_f[4] = ws.q_s[6]
    ws.dq_f[4] = ws.dq_s[6]
    return forces


def _swap_stance(ws: WalkerState, cfg: SimConfig, shape: rl.FootShape) -> None:
    surface = cfg.terrain.sand_level
    old_center = _anchor(ws) + np.array([0.0, cfg.foot_radius])
    new_center = _swing_center(ws, cfg)
    new_center_vel = _swing_center_vel(ws, cfg)

    ws.stance = ws.stance.other
    ws.c0 = np.array([new_center[0], min(new_center[1] - cfg.foot_radius, surface)])
    ws.liftoff = old_center
    # relabel model coordinates: swing pair becomes the stance pair
    q = ws.q_s
    dq = ws.dq_s
    ws.q_s = np.array([q[2], q[3], q[0], q[1], q[4], 0.0, 0.0])
    if cfg.terrain_mode == "granular":
        # intrusion starts from rest vertically (the reset absorbs the
        # contact-formation transient); the landing skid carries over
        anchor_rate = np.array([new_center_vel[0], 0.0])
    else:
        anchor_rate = np.zeros(2)
    ws.dq_s = np.array(
        [dq[2], dq[3], dq[0], dq[1], dq[4], anchor_rate[0], anchor_rate[1]]
    )
    # frontal relabel is a mirror about the new stance hip
    p = ws.q_f
    dp = ws.dq_f
    ws.q_f = np.array([0.0, math.pi - p[1], -p[2], 0.0, ws.q_s[6]])
    ws.dq_f = np.array([0.0, -dp[1], -dp[2], 0.0, ws.dq_s[6]])

    pitch = float(ws.q_s[1])
    try:
        xr, zr = rl.lowest_point(shape, pitch)
    except rl.ContactOutsideSoleError as exc:
        raise DivergenceError(ws.t, f"({exc})") from exc
    ws.theta_r0 = rl.orientation_angle(shape, (xr, zr))
    ws.t_stance_start = ws.t
    ws.step_count += 1
    ws.prev_swing_height = float("inf")

    # latch the stance chord at touchdown
    hip = _hip(ws, cfg)
    center = ws.c0 + np.array([0.0, cfg.foot_radius])
    r = float(np.linalg.norm(hip - center))
    r_max = (cfg.sagittal.l_t + cfg.sagittal.l_c) * 0.999
    ws.r_latch = min(max(r, 0.2 * r_max), r_max)


def _advance(ws: WalkerState, cfg: SimConfig, shape: rl.FootShape) -> SimRecord:
    """One fixed step; returns the post-step record."""
    tau_a, dq_a, tau_s, tau_f = _control(ws, cfg)
    # rates at the control instant, for consistent power accounting
    dq_s_act = ws.dq_s[:4].copy()
    dq_f_act = ws.dq_f[1:3].copy()
    forces = _integrate(ws, cfg, tau_s, tau_f)
    f_x, f_y, f_z, gamma, depth, tau_bar = forces
    ws.t += cfg.dt

    # reported hip torques: crossbar holding demand plus the swing-side PD
    i_st, i_sw = (0, 3) if ws.stance is gt.Side.LEFT else (3, 0)
    tau_a = tau_a.copy()
    tau_a[i_st], tau_a[i_sw] = gt.frontal_torques_to_hips(tau_bar, tau_f[1])
    tau_f = np.array([tau_bar, tau_f[1]])

    state = np.concatenate([ws.q_s, ws.dq_s, ws.q_f, ws.dq_f])
    if not np.all(np.isfinite(state)) or np.any(np.abs(state) > cfg.divergence_limit):
        raise DivergenceError(ws.t)

    # rolling bookkeeping on the stance foot
    pitch = float(ws.q_s[1])
    try:
        xr, zr = rl.lowest_point(shape, pitch)
    except rl.ContactOutsideSoleError as exc:
        raise DivergenceError(ws.t, f"({exc})") from exc
    theta_r = rl.orientation_angle(shape, (xr, zr))
    d_theta = rl.rolling_angle(ws.theta_r0, theta_r)
    v_contact = (float(ws.dq_s[5]), float(ws.dq_s[6]))
    try:
        r_eff = min(rl.effective_radius(v_contact, float(ws.dq_s[1])), cfg.r_eff_cap)
    except rl.NoRotationError:
        r_eff = cfg.r_eff_cap

    # powers in actuation space and per plane
    power = float(tau_a @ dq_a)
    power_abs = float(np.sum(np.abs(tau_a * dq_a)))
    power_s = float(tau_s @ dq_s_act)
    power_f = float(tau_f @ dq_f_act)

    com, com_v = _com(ws, cfg)
    hip = _hip(ws, cfg)
    phase = min(max((ws.t - ws.t_stance_start) / cfg.gait.stance_duration, 0.0), 1.0)

    rec = SimRecord(
        t=ws.t,
        stance_leg=ws.stance.value,
        stance_phase=phase,
        step_count=ws.step_count,
        q_s1=float(ws.q_s[0]), q_s2=float(ws.q_s[1]), q_s3=float(ws.q_s[2]),
        q_s4=float(ws.q_s[3]), q_s5=float(ws.q_s[4]),
        dq_s1=float(ws.dq_s[0]), dq_s2=float(ws.dq_s[1]), dq_s3=float(ws.dq_s[2]),
        dq_s4=float(ws.dq_s[3]), dq_s5=float(ws.dq_s[4]),
        x_s=float(ws.q_s[5]),
        y_s=float(ws.q_f[3]),
        z_s=max(0.0, -float(ws.q_s[6])),
        dx_s=float(ws.dq_s[5]),
        dy_s=float(ws.dq_f[3]),
        dz_s=-float(ws.dq_s[6]),
        q_f1=float(ws.q_f[0]), q_f2=float(ws.q_f[1]), q_f3=float(ws.q_f[2]),
        dq_f1=float(ws.dq_f[0]), dq_f2=float(ws.dq_f[1]), dq_f3=float(ws.dq_f[2]),
        tau_a1=float(tau_a[0]), tau_a2=float(tau_a[1]), tau_a3=float(tau_a[2]),
        tau_a4=float(tau_a[3]), tau_a5=float(tau_a[4]), tau_a6=float(tau_a[5]),
        f_x=float(f_x), f_y=float(f_y), f_z=float(f_z),
        theta_r=theta_r, delta_theta_r=d_theta, gamma=gamma, r_eff=float(r_eff),
        power=power, power_abs_joints=power_abs, power_s=power_s, power_f=power_f,
        com_x=float(com[0]), com_z=float(com[1]),
        com_vx=float(com_v[0]), com_vz=float(com_v[1]),
        hip_x=float(hip[0]), hip_z=float(hip[1]),
    )

    # touchdown: crossing detector armed past the swing apex, forced at the
    # schedule boundary (swing timing known in advance)
    swing_h = float(_swing_center(ws, cfg)[1]) - cfg.foot_radius
    if phase >= 1.0 or (
        phase > 0.5
        and detect_touchdown(ws.prev_swing_height, swing_h, cfg.terrain.sand_level)
    ):
        _swap_stance(ws, cfg, shape)
    else:
        ws.prev_swing_height = swing_h
    return rec


def step(ws: WalkerState, cfg: SimConfig):
    """Advance a copy of the state by one step; returns (state', record)."""
    shape = rl.FootShape.semicylinder(cfg.foot_radius)
    out = copy.deepcopy(ws)
    rec = _advance(out, cfg, shape)
    return out, rec


def initial_state(cfg: SimConfig) -> WalkerState:
    """On-reference starting state at the beginning of a left stance."""
    surface = cfg.terrain.sand_level
    p = cfg.sagittal
    ws = WalkerState()
    ws.c0 = np.array([0.0, surface])
    ws.liftoff = np.array(
        [-cfg.gait.step_length, surface + cfg.foot_radius]
    )
    ws.q_f = np.array([0.0, math.pi / 2.0, 0.0, 0.0, 0.0])

    ws.line_x0 = -0.5 * cfg.gait.step_length
    ws.r_latch = _nominal_chord(cfg)

    refs0 = _model_refs(ws, cfg, 0.0)
    refs1 = _model_refs(ws, cfg, 1e-5)
    ws.q_s[:5] = refs0
    ws.dq_s[:5] = (refs1 - refs0) / 1e-5
    ws.dq_s[4] = 0.0

    rng = np.random.default_rng(cfg.seed)
    jitter = rng.uniform(-cfg.initial_jitter, cfg.initial_jitter, 4)
    ws.q_s[:4] += jitter

    shape = rl.FootShape.semicylinder(cfg.foot_radius)
    xr, zr = rl.lowest_point(shape, float(ws.q_s[1]))
    ws.theta_r0 = rl.orientation_angle(shape, (xr, zr))
    return ws


def run(cfg: SimConfig) -> Trajectory:
    """Simulate for the configured duration; deterministic given the config."""
    ws = initial_state(cfg)
    shape = rl.FootShape.semicylinder(cfg.foot_radius)
    n_steps = int(round(cfg.duration / cfg.dt))
    records = []
    for k in range(1, n_steps + 1):
        rec = _advance(ws, cfg, shape)
        if k % cfg.decimation == 0:
            records.append(rec)
    meta = {
        "dt": cfg.dt,
        "duration": cfg.duration,
        "integrator": cfg.integrator,
        "terrain_mode": cfg.terrain_mode,
        "decimation": cfg.decimation,
        "seed": cfg.seed,
        "v_target": cfg.gait.v_target,
        "h_com": cfg.h_com,
        "robot_weight": (
            (cfg.sagittal.m_b + 2 * cfg.sagittal.m_t + 2 * cfg.sagittal.m_c)
            * cfg.sagittal.g
        ),
        "cycle_period": cfg.gait.cycle_period,
        "stance_duration": cfg.gait.stance_duration,
    }
    return Trajectory(records=records, meta=meta)


def integrate_free(
    params: dyn.SagittalParams,
    q0: np.ndarray,
    dq0: np.ndarray,
    dt: float,
    n_steps: int,
    method: str = "rk4",
):
    """Ballistic sub-case: zero torque, zero contact force, full 7-DoF flight.

    Returns the final (q, dq).  Used for energy-conservation verification.
    """
    zero_tau = np.zeros(4)
    no_force = dyn.GrfSagittal()

    def acc(q, dq):
        return dyn.sagittal_accel(params, dyn.SagittalState(q, dq), zero_tau, no_force)

    q = np.array(q0, dtype=float)
    dq = np.array(dq0, dtype=float)
    for _ in range(n_steps):
        if method == "rk4":
            k1q, k1v = dq, acc(q, dq)
            k2q, k2v = dq + 0.5 * dt * k1v, acc(q + 0.5 * dt * k1q, dq + 0.5 * dt * k1v)
            k3q, k3v = dq + 0.5 * dt * k2v, acc(q + 0.5 * dt * k2q, dq + 0.5 * dt * k2v)
            k4q, k4v = dq + dt * k3v, acc(q + dt * k3q, dq + dt * k3v)
            q = q + dt / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q)
            dq = dq + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        elif method == "semi_implicit":
            dq = dq + acc(q, dq) * dt
            q = q + dq * dt
        else:
            raise ValueError(f"unknown integrator '{method}'")
    return q, dq
