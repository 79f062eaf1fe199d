"""
Initial data of the admissible class: smooth bumps with compact support away from the x2-axis.
"""

import logging
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
from scipy.integrate import simpson

from hyperbolic_blowup.constants import AXIS_MASS_NODES, AXIS_SCAN_DEPTH, AXIS_SCAN_NODES
from hyperbolic_blowup.coords import PointX, PointZ, SupportStrip, z_to_x_arrays

logger = logging.getLogger(__name__)


class FieldName(StrEnum):
    """Fields that can be evaluated from the initial data."""

    OMEGA0 = "omega0"
    RHO0 = "rho0"
    F1 = "f1"


class Frame(StrEnum):
    """Coordinate frame of evaluation points."""

    X = "x"
    Z = "z"


@dataclass(frozen=True)
class BumpProfile:
    """Standard smooth bump ``amplitude * exp(-s^2 / (1 - s^2))`` with ``s = (y - center) / radius``."""

    center: float
    radius: float
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ValueError(f"bump radius must be positive, got {self.radius!r}")
        if self.amplitude < 0:
            raise ValueError(f"bump amplitude must be nonnegative, got {self.amplitude!r}")

    def __call__(self, y: np.ndarray | float) -> np.ndarray:
        s = (np.asarray(y, dtype=float) - self.center) / self.radius
        out = np.zeros_like(s)
        inside = np.abs(s) < 1.0
        si = s[inside]
        out[inside] = self.amplitude * np.exp(-(si * si) / (1.0 - si * si))
        return out

    @property
    def lower(self) -> float:
        return self.center - self.radius

    @property
    def upper(self) -> float:
        return self.center + self.radius


@dataclass(frozen=True)
class ProductProfile:
    """Field ``x1_factor(x1) * x2_factor(x2)`` on the quadrant.

    The x2 factor is restricted to ``x2 >= 0``; a factor centered at 0 is the
    one-sided restriction of an even bump and touches the x1-axis.
    """

    x1_factor: BumpProfile
    x2_factor: BumpProfile

    @classmethod
    def zero(cls: type["ProductProfile"]) -> "ProductProfile":
        """Return the identically vanishing field."""
        return cls(BumpProfile(2.0, 1.0, 0.0), BumpProfile(0.0, 2.0, 1.0))

    @property
    def is_zero(self) -> bool:
        return self.x1_factor.amplitude == 0.0 or self.x2_factor.amplitude == 0.0

    @property
    def support_box(self) -> tuple[float, float, float, float]:
        """Return ``(x1_lo, x1_hi, x2_lo, x2_hi)`` of the closed support."""
        return (
            self.x1_factor.lower,
            self.x1_factor.upper,
            max(0.0, self.x2_factor.lower),
            self.x2_factor.upper,
        )

    @property
    def sup_norm(self) -> float:
        """Exact maximum of the field over the quadrant."""
        if self.is_zero:
            return 0.0
        peak_x2 = max(0.0, self.x2_factor.center)
        return float(self.x1_factor.amplitude * self.x2_factor(peak_x2))

    def touches_axis(self) -> bool:
        """Whether the field is positive somewhere on ``x2 = 0``."""
        return not self.is_zero and float(self.x2_factor(0.0)) > 0.0

    def __call__(self, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        x2 = np.asarray(x2, dtype=float)
        return self.x1_factor(x1) * np.where(x2 >= 0.0, self.x2_factor(x2), 0.0)


@dataclass(frozen=True)
class AxisBound:
    """Lower bound ``c`` on the axis mass and the threshold below which it holds."""

    c: float
    threshold: float | None


@dataclass(frozen=True)
class InitialData:
    """Initial vorticity and density with derived support metadata.

    Attributes:
        omega0: Initial vorticity.
        rho0: Initial density.
        strip: Support geometry shared by both fields.
        c_rho: Axis-mass lower bound for the forcing profile f1 (0 when rho0 vanishes).
        omega_axis: Axis-mass bound for omega0 (Z1 is its threshold).
        f1_axis: Axis-mass bound for f1 (Z2 is its threshold).
    """

    omega0: ProductProfile
    rho0: ProductProfile
    strip: SupportStrip
    omega_axis: AxisBound
    f1_axis: AxisBound

    @classmethod
    def build(cls: type["InitialData"], omega0: ProductProfile, rho0: ProductProfile) -> "InitialData":
        """Construct and certify initial data from two profiles.

        Args:
            omega0: Initial vorticity profile.
            rho0: Initial density profile.

        Returns:
            Validated data with strip and axis-mass bounds filled in.

        Raises:
            ValueError: If a support touches the x2-axis.
        """
        boxes = [p.support_box for p in (omega0, rho0) if not p.is_zero] or [omega0.support_box]
        delta = min(b[0] for b in boxes)
        if not delta > 0:
            raise ValueError(f"support must stay away from the x2-axis, got min x1 = {delta!r}")
        strip = SupportStrip.from_box(delta, max(b[1] for b in boxes), max(b[3] for b in boxes))
        partial = cls(omega0, rho0, strip, AxisBound(0.0, None), AxisBound(0.0, None))
        return cls(
            omega0,
            rho0,
            strip,
            axis_bound(partial, FieldName.OMEGA0),
            axis_bound(partial, FieldName.F1),
        )

    @property
    def c_rho(self) -> float:
        return self.f1_axis.c

    def evaluate(self, field: FieldName, a: np.ndarray, b: np.ndarray, frame: Frame) -> np.ndarray:
        """Evaluate a field at ``(a, b)`` given in the requested frame (vectorized)."""
        if frame == Frame.Z:
            x1, x2 = z_to_x_arrays(a, b)
        else:
            x1 = np.asarray(a, dtype=float)
            x2 = np.asarray(b, dtype=float)
        if field == FieldName.OMEGA0:
            return self.omega0(x1, x2)
        rho = self.rho0(x1, x2)
        if field == FieldName.RHO0:
            return rho
        # f1 = exp((z2 - z1) / 2) * rho0 = rho0 / x1; zero wherever rho0 is
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(rho != 0.0, rho / x1, 0.0)


def eval_initial(data: InitialData, field: FieldName, p: PointX | PointZ) -> float:
    """Evaluate one initial field at a single point.

    The frame follows the point type; z-points are composed with ``z_to_x``.

    Args:
        data: The initial data.
        field: Which of omega0, rho0, f1.
        p: Evaluation point.

    Returns:
        The field value.
    """
    if isinstance(p, PointZ):
        return float(data.evaluate(field, np.array(p.z1), np.array(p.z2), Frame.Z))
    return float(data.evaluate(field, np.array(p.x1), np.array(p.x2), Frame.X))


def axis_mass(data: InitialData, z1: np.ndarray | float, field: FieldName = FieldName.F1) -> np.ndarray:
    """Integrate a field in z2 along vertical lines.

    Composite Simpson over the support interval of each line.

    Args:
        data: The initial data.
        z1: Line position(s).
        field: ``FieldName.F1`` or ``FieldName.OMEGA0``.

    Returns:
        The z2-integral on each line; zero right of the support.
    """
    z1 = np.atleast_1d(np.asarray(z1, dtype=float))
    a, b = data.strip.line_interval(z1)
    frac = np.linspace(0.0, 1.0, AXIS_MASS_NODES)
    u = a[:, None] + (b - a)[:, None] * frac[None, :]
    values = data.evaluate(field, np.broadcast_to(z1[:, None], u.shape), u, Frame.Z)
    h = (b - a) / (AXIS_MASS_NODES - 1)
    return simpson(values, dx=1.0, axis=1) * h


def axis_bound(data: InitialData, field: FieldName) -> AxisBound:
    """Certify the axis-mass bound ``c`` and its threshold on a z1 scan.

    ``c`` is half the limiting mass far left of the support; the threshold is the
    largest scanned z1 such that the mass stays at least ``c`` on every scanned line
    to its left.

    Args:
        data: The initial data (its own axis bounds are not used).
        field: ``FieldName.F1`` (gives c_rho and Z2) or ``FieldName.OMEGA0`` (Z1).

    Returns:
        The bound; ``threshold`` is ``None`` when the field has no axis mass.
    """
    scan = np.linspace(data.strip.z1_max - AXIS_SCAN_DEPTH, data.strip.z1_max, AXIS_SCAN_NODES)
    mass = axis_mass(data, scan, field)
    c = 0.5 * float(mass[0])
    if not c > 0:
        return AxisBound(0.0, None)
    below = mass < c
    idx = int(np.argmax(below)) - 1 if below.any() else len(scan) - 1
    threshold = float(scan[max(idx, 0)])
    logger.debug(f"axis bound for {field}: c={c:.6g}, threshold={threshold:.6g}")
    return AxisBound(c, threshold)


@dataclass(frozen=True)
class KnComponents:
    """Grid estimate of the K_1 norm components of a field snapshot."""

    cn_estimate: float
    support_measure: float
    inv_delta: float
    empty_support: bool


def kn_components(values: np.ndarray, x1_axis: np.ndarray, x2_axis: np.ndarray) -> KnComponents:
    """Estimate ``|f|_{C^1}``, ``|supp f|`` and ``1 / delta_f`` from samples.

    Args:
        values: Samples of shape ``(len(x1_axis), len(x2_axis))``.
        x1_axis: Uniform x1 sample positions.
        x2_axis: Uniform x2 sample positions.

    Returns:
        The components; for an empty support only the sup norm is reported.

    Raises:
        ValueError: If an axis has fewer than two samples or the shapes disagree.
    """
    values = np.asarray(values, dtype=float)
    if len(x1_axis) < 2 or len(x2_axis) < 2:
        raise ValueError(f"need at least 2 samples per axis, got {len(x1_axis)} x {len(x2_axis)}")
    if values.shape != (len(x1_axis), len(x2_axis)):
        raise ValueError(f"values of shape {values.shape} do not match the axes ({len(x1_axis)}, {len(x2_axis)})")
    sup = float(np.max(np.abs(values))) if values.size else 0.0
    support = values != 0.0
    if not support.any():
        return KnComponents(sup, 0.0, 0.0, True)
    d1 = float(x1_axis[1] - x1_axis[0])
    d2 = float(x2_axis[1] - x2_axis[0])
    g1, g2 = np.gradient(values, d1, d2)
    cn = sup + float(np.max(np.abs(g1))) + float(np.max(np.abs(g2)))
    measure = float(np.count_nonzero(support)) * d1 * d2
    rows = np.nonzero(support.any(axis=1))[0]
    inv_delta = 1.0 / float(x1_axis[rows[0]])
    return KnComponents(cn, measure, inv_delta, False)


def axis_threshold(data: InitialData, field: FieldName) -> float | None:
    """Return Z1 (``FieldName.OMEGA0``) or Z2 (``FieldName.F1``) of the data."""
    bound = data.omega_axis if field == FieldName.OMEGA0 else data.f1_axis
    return bound.threshold
