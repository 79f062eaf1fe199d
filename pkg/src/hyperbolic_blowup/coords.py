"""
Coordinate maps between the quadrant D and the (z1, z2) plane.

z1 = log(x1 x2) labels the hyperbola through a point and z2 = log(x2 / x1) the
position along it, so x1 = exp((z1 - z2) / 2) and x2 = exp((z1 + z2) / 2).
"""

import math
from dataclasses import dataclass

import numpy as np

from hyperbolic_blowup.errors import CoordinateDomainError, CoordinateRangeError


@dataclass(frozen=True)
class PointX:
    """A point of the quadrant in physical coordinates."""

    x1: float
    x2: float


@dataclass(frozen=True)
class PointZ:
    """A point in hyperbolic coordinates."""

    z1: float
    z2: float


@dataclass(frozen=True)
class SupportStrip:
    """Support geometry of the initial data.

    Attributes:
        K: Half-width constant of the strip containing every z-image of the support.
        z1_max: Right edge of the support in z1, ``log(C1 * C2)``.
        delta0: Distance of the support from the x2-axis.
        box_x: The x-frame box ``(delta0, C1, 0, C2)`` as ``(x1_lo, x1_hi, x2_lo, x2_hi)``.
    """

    K: float
    z1_max: float
    delta0: float
    box_x: tuple[float, float, float, float]

    @classmethod
    def from_box(cls: type["SupportStrip"], delta: float, c1: float, c2: float) -> "SupportStrip":
        """Build the strip for the support box ``[delta, c1] x [0, c2]``.

        Args:
            delta: Left edge of the box, strictly positive.
            c1: Right edge of the box.
            c2: Top edge of the box.

        Returns:
            The strip with the smallest admissible K.
        """
        if delta <= 0:
            raise CoordinateDomainError("delta", delta)
        if c1 <= delta or c2 <= 0:
            raise ValueError(f"degenerate support box [{delta}, {c1}] x [0, {c2}]")
        k = max(-2.0 * math.log(delta), 2.0 * math.log(c1), 2.0 * math.log(c2), 0.0)
        # K must be strictly positive even for boxes inside the unit square
        k = max(k, np.finfo(float).eps)
        return cls(K=k, z1_max=math.log(c1 * c2), delta0=delta, box_x=(delta, c1, 0.0, c2))

    def line_interval(self, z1: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return the z2-interval of the support box on each vertical line.

        Lines right of ``z1_max`` get an empty interval ``a == b``.

        Args:
            z1: Line positions.

        Returns:
            Lower and upper ends ``(a, b)`` with ``a <= b``.
        """
        delta, c1, _, c2 = self.box_x
        z1 = np.asarray(z1, dtype=float)
        a = z1 - 2.0 * math.log(c1)
        b = np.minimum(z1 - 2.0 * math.log(delta), 2.0 * math.log(c2) - z1)
        return a, np.maximum(a, b)

    def contains(self, z1: np.ndarray, z2: np.ndarray) -> np.ndarray:
        """Check membership in the half-strip ``|z1 - z2| <= K, z1 + z2 <= K``."""
        z1 = np.asarray(z1, dtype=float)
        z2 = np.asarray(z2, dtype=float)
        return (np.abs(z1 - z2) <= self.K) & (z1 + z2 <= self.K)


def x_to_z(p: PointX) -> PointZ:
    """Map an interior point of the quadrant to hyperbolic coordinates.

    Args:
        p: Point with both coordinates strictly positive.

    Returns:
        The image ``(log(x1 x2), log(x2 / x1))``.

    Raises:
        CoordinateDomainError: If a coordinate is not positive.
    """
    if not p.x1 > 0:
        raise CoordinateDomainError("x1", p.x1)
    if not p.x2 > 0:
        raise CoordinateDomainError("x2", p.x2)
    # Separate logs keep the round trip accurate for widely different magnitudes
    lx1 = math.log(p.x1)
    lx2 = math.log(p.x2)
    return PointZ(z1=lx1 + lx2, z2=lx2 - lx1)


def z_to_x(p: PointZ) -> PointX:
    """Map a point of the z-plane back to the open quadrant.

    Args:
        p: Any point of the plane.

    Returns:
        The point ``(exp((z1 - z2) / 2), exp((z1 + z2) / 2))``.

    Raises:
        CoordinateRangeError: If a coordinate overflows.
    """
    try:
        return PointX(x1=math.exp(0.5 * (p.z1 - p.z2)), x2=math.exp(0.5 * (p.z1 + p.z2)))
    except OverflowError as e:
        raise CoordinateRangeError(f"z=({p.z1!r}, {p.z2!r}) maps outside the floating range") from e


def z_to_x_arrays(z1: np.ndarray, z2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``z_to_x``; overflowing entries become ``inf`` silently."""
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    with np.errstate(over="ignore"):
        return np.exp(0.5 * (z1 - z2)), np.exp(0.5 * (z1 + z2))


def hyperbola_level(x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """Return ``z1 = log(x1 x2)``, with ``-inf`` on the boundary ``x2 = 0``.

    Raises:
        CoordinateDomainError: If any ``x1`` is not positive or any ``x2`` is negative.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if np.any(~(x1 > 0)):
        raise CoordinateDomainError("x1", float(np.min(x1)))
    if np.any(x2 < 0):
        raise CoordinateDomainError("x2", float(np.min(x2)))
    with np.errstate(divide="ignore"):
        return np.log(x1) + np.log(x2)
