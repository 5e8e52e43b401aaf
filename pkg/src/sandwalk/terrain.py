"""Granular ground reaction forces and terrain parameter calibration.

Local stresses follow the granular resistive-force description: a surface
element's stress per unit depth depends only on the element attack angle
beta and the motion direction gamma, not on speed.  The stress magnitudes
come from the standard generic Fourier coefficient table (normalized so a
horizontal element penetrating straight down sees 1 N/cm^3), rescaled by a
media stiffness multiplier and the calibrated scaling factor zeta.

Sagittal forces integrate the stress over the triangular solidification
wedge bounded by the internal friction angle, giving the quadratic depth
law F = alpha/(2 tan phi_s) * W * z^2.  The lateral force is the bulldozing
resistance, saturating with accumulated lateral displacement over the
length scale lambda.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import GrfSagittal

__all__ = [
    "RftCoefficients",
    "GENERIC_RFT_COEFFICIENTS",
    "TerrainParams",
    "IntrusionKinematics",
    "PenetrationRecord",
    "CalibrationResult",
    "CalibrationError",
    "local_stress",
    "sagittal_forces",
    "sagittal_forces_elements",
    "lateral_force",
    "bulldozing_stress",
    "calibrate",
]

# N/cm^3 -> N/m^3
_STRESS_UNIT = 1.0e6


@dataclass(frozen=True)
class RftCoefficients:
    """Fourier coefficients of the direction-dependent local stresses.

    Units are N/cm^3 of the reference medium; the vertical stress series
    uses the A (cosine) and B (sine) terms, the horizontal series the C
    (cosine) and D (sine) terms, all over the harmonics
    (m, n) in {(0,0), (1,0), (0,1), (1,1), (-1,1)} of (2 m beta + n gamma).
    """

    a00: float = 0.206
    a10: float = 0.169
    b01: float = 0.358
    b11: float = 0.212
    bm11: float = 0.055
    c01: float = 0.253
    c11: float = -0.124
    cm11: float = 0.007
    d10: float = 0.088


GENERIC_RFT_COEFFICIENTS = RftCoefficients()


@dataclass(frozen=True)
class TerrainParams:
    """Granular media description."""

    phi_s: float = math.radians(38.0)  # internal friction angle [rad]
    zeta: float = 1.36                 # calibrated local-stress scaling factor
    lam: float = 0.03                  # bulldozing saturation length [m]
    rho: float = 1660.0                # bulk density [kg/m^3]
    width: float = 0.05                # foot width [m]
    sand_level: float = 0.0            # surface height [m]
    alpha_scale: float = 8.0           # media stiffness relative to the generic table
    coefficients: RftCoefficients = field(default_factory=RftCoefficients)

    def __post_init__(self) -> None:
        if not 0.0 < self.phi_s < math.pi / 2:
            raise ValueError("phi_s must lie in (0, pi/2)")
        if self.zeta <= 0.0:
            raise ValueError("zeta must be strictly positive")
        if self.lam <= 0.0:
            raise ValueError("lam must be strictly positive")
        if self.rho <= 0.0:
            raise ValueError("rho must be strictly positive")
        if self.width <= 0.0:
            raise ValueError("width must be strictly positive")
        if self.alpha_scale <= 0.0:
            raise ValueError("alpha_scale must be strictly positive")


@dataclass
class IntrusionKinematics:
    """Motion state of the stance contact needed by the force laws.

    ``depth`` is the sinkage of the contact below its initial location
    (positive down); ``gamma`` is the sagittal velocity direction angle
    atan2(dz_up, dx) and may be NaN when the intrusion speed is below the
    direction threshold; ``y_slip`` is the accumulated lateral displacement
    (signed).
    """

    depth: float = 0.0
    gamma: float = float("nan")
    v_sagittal: tuple[float, float] = (0.0, 0.0)
    v_frontal: tuple[float, float] = (0.0, 0.0)
    y_slip: float = 0.0
    beta: float | None = None  # wedge face attack angle; None -> phi_s


@dataclass(frozen=True)
class PenetrationRecord:
    """One plate penetration measurement."""

    displacement: float  # depth [m] (vertical test) or travel [m] (horizontal)
    force: float         # [N]
    direction: str = "vertical"


@dataclass(frozen=True)
class CalibrationResult:
    zeta: float
    lam: float
    residual_vertical: float
    residual_horizontal: float


class CalibrationError(ValueError):
    """Raised for degenerate or insufficient penetration data."""


def local_stress(
    beta: float,
    gamma: float,
    zeta: float,
    coefficients: RftCoefficients = GENERIC_RFT_COEFFICIENTS,
    scale: float = 1.0,
) -> tuple[float, float]:
    """Local stresses per unit depth (alpha_x, alpha_z) in N/m^3.

    ``beta`` is the element attack angle, ``gamma`` the motion direction
    angle with the vertical component measured upward (sinking motion has
    gamma < 0).  A NaN gamma marks an undefined motion direction: the
    tangential stress is zero and the normal stress takes the static
    bearing value of straight-down penetration.  Horizontal motion
    reversal mirrors the element, flipping the sign of alpha_x.
    """
    if zeta == 0.0 or scale == 0.0:
        return 0.0, 0.0
    if math.isnan(gamma):
        g_pen = math.pi / 2  # static bearing at the penetration branch
        a_z = _alpha_z(beta, g_pen, coefficients)
        return 0.0, zeta * scale * _STRESS_UNIT * a_z
    vx = math.cos(gamma)
    vz = math.sin(gamma)  # upward component
    sign = 1.0
    if vx < 0.0:
        vx = -vx
        beta = -beta
        sign = -1.0
    g_pen = math.atan2(-vz, vx)  # positive when moving into the media
    a_x = _alpha_x(beta, g_pen, coefficients)
    a_z = _alpha_z(beta, g_pen, coefficients)
    k = zeta * scale * _STRESS_UNIT
    return sign * k * a_x, k * a_z


def _alpha_z(beta: float, g: float, c: RftCoefficients) -> float:
    return (
        c.a00
        + c.a10 * math.cos(2 * beta)
        + c.b01 * math.sin(g)
        + c.b11 * math.sin(2 * beta + g)
        + c.bm11 * math.sin(-2 * beta + g)
    )


def _alpha_x(beta: float, g: float, c: RftCoefficients) -> float:
    return (
        c.d10 * math.sin(2 * beta)
        + c.c01 * math.cos(g)
        + c.c11 * math.cos(2 * beta + g)
        + c.cm11 * math.cos(-2 * beta + g)
    )


def wedge_area(depth: float, phi_s: float) -> float:
    """Cross-section area of the triangular solidification wedge [m^2]."""
    return depth ** 2 / (2.0 * math.tan(phi_s))


def sagittal_forces(terrain: TerrainParams, kin: IntrusionKinematics) -> GrfSagittal:
    """Sagittal ground reaction force (F_x, F_z) on the stance foot.

    F_j = zeta * alpha_j(beta, gamma) * W * z^2 / (2 tan phi_s).  Zero depth
    gives zero force; the horizontal component opposes the slip direction
    and the vertical component opposes penetration (it turns tensile on the
    extraction branch).
    """
    if kin.depth < 0.0:
        raise ValueError("sinkage depth must be non-negative")
    if kin.depth == 0.0:
        return GrfSagittal(0.0, 0.0)
    beta = terrain.phi_s if kin.beta is None else kin.beta
    # the wedge face rides the leading side of a symmetric foot, so fold the
    # motion into the positive-horizontal frame and sign the drag afterwards
    gamma = kin.gamma
    sign = 1.0
    if not math.isnan(gamma):
        vx = math.cos(gamma)
        vz = math.sin(gamma)
        if vx < 0.0:
            sign = -1.0
            gamma = math.atan2(vz, -vx)
    a_x, a_z = local_stress(
        beta, gamma, terrain.zeta, terrain.coefficients, terrain.alpha_scale
    )
    geom = terrain.width * wedge_area(kin.depth, terrain.phi_s)
    return GrfSagittal(f_x=-sign * a_x * geom, f_z=a_z * geom)


def sagittal_forces_elements(
    terrain: TerrainParams,
    kin: IntrusionKinematics,
    radius: float,
    n_elements: int = 64,
) -> GrfSagittal:
    """Element-resolved force for a semi-cylindrical sole of given radius.

    The submerged arc is split into at most ``n_elements`` flat elements;
    each leading element contributes its local stress times local depth
    times element area.  Slower but shape-aware alternative to the wedge
    closed form.
    """
    if kin.depth < 0.0:
        raise ValueError("sinkage depth must be non-negative")
    depth = min(kin.depth, radius)
    if depth == 0.0:
        return GrfSagittal(0.0, 0.0)
    n_elements = min(int(n_elements), 64)
    psi_max = math.acos(1.0 - depth / radius)  # submerged half-arc
    psi = np.linspace(-psi_max, psi_max, n_elements + 1)
    mid = 0.5 * (psi[:-1] + psi[1:])
    dl = radius * np.diff(psi)
    local_depth = depth - radius * (1.0 - np.cos(mid))
    f_x = 0.0
    f_z = 0.0
    for b, h, w in zip(mid, local_depth, dl):
        if h <= 0.0:
            continue
        a_x, a_z = local_stress(
            float(b), kin.gamma, terrain.zeta, terrain.coefficients, terrain.alpha_scale
        )
        da = terrain.width * w * h
        f_x += -a_x * da
        f_z += a_z * da
    return GrfSagittal(f_x=float(f_x), f_z=float(f_z))


def bulldozing_stress(terrain: TerrainParams) -> float:
    """Lateral stress per unit depth on the vertical foot side [N/m^3]."""
    a_x, _ = local_stress(
        math.pi / 2, 0.0, terrain.zeta, terrain.coefficients, terrain.alpha_scale
    )
    return abs(a_x)


def lateral_force(terrain: TerrainParams, kin: IntrusionKinematics) -> float:
    """Lateral bulldozing force F_y [N], opposing the accumulated slip.

    F_y = lambda (1 - exp(-|y_s|/lambda)) * alpha_y * z^2/2, signed against
    the slip direction.  Zero when either the slip or the depth vanishes;
    strictly increasing and saturating in |y_s|.
    """
    if kin.depth < 0.0:
        raise ValueError("sinkage depth must be non-negative")
    y = abs(kin.y_slip)
    if y == 0.0 or kin.depth == 0.0:
        return 0.0
    a_y = bulldozing_stress(terrain)
    g_z = 0.5 * kin.depth ** 2
    magnitude = terrain.lam * (1.0 - math.exp(-y / terrain.lam)) * a_y * g_z
    return -math.copysign(magnitude, kin.y_slip)


# ---------------------------------------------------------------------------
# calibration from plate penetration tests
# ---------------------------------------------------------------------------

def _vertical_model(terrain: TerrainParams, depth: np.ndarray, plate_width: float) -> np.ndarray:
    """Plate force-depth law used for the vertical fit, at unit zeta."""
    unit = replace(terrain, zeta=1.0)
    kin = IntrusionKinematics(depth=1.0, gamma=-math.pi / 2)
    a_x, a_z = local_stress(
        unit.phi_s, kin.gamma, 1.0, unit.coefficients, unit.alpha_scale
    )
    k = a_z * plate_width / (2.0 * math.tan(unit.phi_s))
    return k * depth ** 2


def calibrate(
    vertical: list[PenetrationRecord],
    horizontal: list[PenetrationRecord],
    nominal: TerrainParams,
    plate_width: float | None = None,
    plate_depth: float = 0.02,
) -> CalibrationResult:
    """Least-squares fit of zeta and lambda from penetration test data.

    zeta comes from the vertical force-depth curve (linear least squares on
    the quadratic depth law); lambda from the horizontal force-displacement
    curve (1-D golden-section least squares on the saturating bulldozing
    law at the given side-plate depth).  Requires at least five strictly
    positive-displacement records per direction and non-degenerate forces.
    """
    if len(vertical) < 5 or len(horizontal) < 5:
        raise CalibrationError("need at least 5 records per direction")
    z = np.array([r.displacement for r in vertical], dtype=float)
    f_v = np.array([r.force for r in vertical], dtype=float)
    y = np.array([r.displacement for r in horizontal], dtype=float)
    f_h = np.array([r.force for r in horizontal], dtype=float)
    if np.any(z <= 0.0) or np.any(y <= 0.0):
        raise CalibrationError("displacements must be strictly positive")
    if not np.any(f_v != 0.0) or not np.any(f_h != 0.0):
        raise CalibrationError("all-zero forces cannot constrain the fit")

    width = nominal.width if plate_width is None else plate_width
    basis = _vertical_model(nominal, z, width)
    denom = float(basis @ basis)
    if denom <= 0.0:
        raise CalibrationError("degenerate vertical basis")
    zeta = float(basis @ f_v) / denom
    if zeta <= 0.0:
        raise CalibrationError("vertical data imply a non-positive zeta")
    res_v = float(np.linalg.norm(f_v - zeta * basis))

    a_y = bulldozing_stress(replace(nominal, zeta=zeta))
    amp = a_y * 0.5 * plate_depth ** 2

    def sse(lam: float) -> float:
        model = lam * (1.0 - np.exp(-y / lam)) * amp
        return float(np.sum((model - f_h) ** 2))

    lam = _golden_min(sse, 1e-5, 10.0)
    res_h = math.sqrt(sse(lam))
    return CalibrationResult(zeta=zeta, lam=lam, residual_vertical=res_v,
                             residual_horizontal=res_h)


def _golden_min(fun, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Golden-section minimum of a unimodal function, bracketed in log space."""
    # coarse log-spaced scan to bracket the minimum
    grid = np.geomspace(lo, hi, 200)
    vals = [fun(g) for g in grid]
    i = int(np.argmin(vals))
    a = grid[max(0, i - 1)]
    b = grid[min(len(grid) - 1, i + 1)]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol * max(1.0, abs(b)):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)
