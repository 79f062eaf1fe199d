"""
Cosh-weighted quadrature of the vorticity: the inner profile W(z1, t) and the
nonlocal stream factor Omega(z1, t).

On the line z1 the vorticity is carried by the Lagrangian label u = z2 - Phi, so
every line integral runs over the fixed support interval of the initial data:

    W(z1, t) = int [omega0(z1, u) + f1(z1, u) I(z1, t)] w(u + Phi(z1, t)) du
    Omega(z1, t) = prefactor * int_{z1}^{Zmax} W(s, t) ds
"""

import logging
import math
from dataclasses import dataclass, field
from enum import StrEnum
from typing import TYPE_CHECKING

import numpy as np
from scipy.integrate import cumulative_trapezoid, simpson

from hyperbolic_blowup.constants import (
    DEFAULT_N_U,
    DEFAULT_N_Z1,
    DEFAULT_Z_MAX_MARGIN,
    DEFAULT_Z_MIN,
    GOLDEN_ITERATIONS,
    SCAN_REFINEMENT,
)
from hyperbolic_blowup.fields import FieldName, Frame, InitialData

if TYPE_CHECKING:
    from hyperbolic_blowup.evolver import SolverState

logger = logging.getLogger(__name__)

_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class KernelKind(StrEnum):
    """Kernel of the Biot-Savart integral."""

    SECH = "sech"  # 1 / |y|^2
    SECH_SQUARED = "sech_squared"  # y1 y2 / |y|^4


@dataclass(frozen=True)
class Weight:
    """z2-weight of the Omega integral together with its prefactor."""

    kind: KernelKind = KernelKind.SECH

    @property
    def prefactor(self) -> float:
        return 0.25 if self.kind == KernelKind.SECH else 0.125


def weight_eval(weight: Weight, z2: np.ndarray | float) -> np.ndarray:
    """Evaluate ``sech(z2)`` or ``sech(z2)^2`` without overflow.

    Args:
        weight: Kernel selection.
        z2: Evaluation points.

    Returns:
        Positive weights; they underflow to 0 far out and never overflow.
    """
    e = np.exp(-np.abs(np.asarray(z2, dtype=float)))
    s = 2.0 * e / (1.0 + e * e)
    return s if weight.kind == KernelKind.SECH else s * s


@dataclass(frozen=True)
class Grid1D:
    """Uniform z1 grid on ``[Zmin, Zmax]``."""

    nodes: np.ndarray

    def __post_init__(self) -> None:
        if self.nodes.ndim != 1 or self.nodes.size < 2 or not np.all(np.diff(self.nodes) > 0):
            raise ValueError("grid nodes must be a strictly increasing 1-D sequence of at least two points")

    @classmethod
    def from_bounds(cls: type["Grid1D"], z_min: float, z_max: float, n: int) -> "Grid1D":
        if not z_min < z_max:
            raise ValueError(f"need Zmin < Zmax, got {z_min!r} >= {z_max!r}")
        return cls(np.linspace(z_min, z_max, n))

    @property
    def h(self) -> float:
        return float(self.nodes[1] - self.nodes[0])

    @property
    def z_min(self) -> float:
        return float(self.nodes[0])

    @property
    def z_max(self) -> float:
        return float(self.nodes[-1])

    def __len__(self) -> int:
        return int(self.nodes.size)


@dataclass(frozen=True)
class QuadratureRule:
    """Composite Simpson rule per line over the support interval ``[a_i, b_i]``."""

    nodes: np.ndarray  # shape (n_lines, n_u)
    spacing: np.ndarray  # shape (n_lines,)

    @classmethod
    def from_intervals(cls: type["QuadratureRule"], a: np.ndarray, b: np.ndarray, n_u: int) -> "QuadratureRule":
        if n_u < 3 or n_u % 2 == 0:
            raise ValueError(f"Simpson rule needs an odd node count >= 3, got {n_u}")
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        frac = np.linspace(0.0, 1.0, n_u)
        nodes = a[:, None] + (b - a)[:, None] * frac[None, :]
        return cls(nodes, (b - a) / (n_u - 1))

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Integrate samples taken at ``nodes`` line by line."""
        return simpson(values, dx=1.0, axis=1) * self.spacing

    @property
    def n_u(self) -> int:
        return int(self.nodes.shape[1])


@dataclass(frozen=True)
class LineData:
    """Initial data tabulated at the quadrature nodes of every line.

    The tables are time independent; only the weight is re-evaluated as Phi moves.
    """

    rule: QuadratureRule
    z1: np.ndarray
    omega0: np.ndarray
    f1: np.ndarray
    data: InitialData | None = None
    omega0_absmax: np.ndarray = field(init=False)
    f1_absmax: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "omega0_absmax", np.max(np.abs(self.omega0), axis=1))
        object.__setattr__(self, "f1_absmax", np.max(np.abs(self.f1), axis=1))

    @classmethod
    def from_data(cls: type["LineData"], data: InitialData, grid: Grid1D, n_u: int) -> "LineData":
        a, b = data.strip.line_interval(grid.nodes)
        rule = QuadratureRule.from_intervals(a, b, n_u)
        z1 = np.broadcast_to(grid.nodes[:, None], rule.nodes.shape)
        return cls(
            rule=rule,
            z1=grid.nodes,
            omega0=data.evaluate(FieldName.OMEGA0, z1, rule.nodes, Frame.Z),
            f1=data.evaluate(FieldName.F1, z1, rule.nodes, Frame.Z),
            data=data,
        )

    def line_values(self, u: np.ndarray, mem: np.ndarray) -> np.ndarray:
        """Evaluate ``omega0 + f1 * mem`` at labels ``u`` (one row per line)."""
        if self.data is None:
            raise ValueError("line tables built from raw values cannot be re-evaluated off-node")
        z1 = np.broadcast_to(self.z1[:, None], u.shape)
        omega0 = self.data.evaluate(FieldName.OMEGA0, z1, u, Frame.Z)
        f1 = self.data.evaluate(FieldName.F1, z1, u, Frame.Z)
        return omega0 + f1 * mem[:, None]


@dataclass(frozen=True)
class Discretization:
    """Everything the solvers need besides the state."""

    data: InitialData
    grid: Grid1D
    lines: LineData
    weight: Weight

    @classmethod
    def build(
        cls: type["Discretization"],
        data: InitialData,
        *,
        z_min: float = DEFAULT_Z_MIN,
        z_max: float | None = None,
        n_z1: int = DEFAULT_N_Z1,
        n_u: int = DEFAULT_N_U,
        kernel: KernelKind = KernelKind.SECH,
    ) -> "Discretization":
        if z_max is None:
            z_max = data.strip.z1_max + DEFAULT_Z_MAX_MARGIN
        if z_max < data.strip.z1_max:
            raise ValueError(f"Zmax={z_max!r} does not cover the support edge {data.strip.z1_max!r}")
        grid = Grid1D.from_bounds(z_min, z_max, n_z1)
        return cls(data, grid, LineData.from_data(data, grid, n_u), Weight(kernel))


def inner_profile_W(state: "SolverState", lines: LineData, weight: Weight) -> np.ndarray:
    """Integrate ``omega / w`` in z2 on every line.

    Args:
        state: Phase and memory per line.
        lines: Tabulated initial data on the Lagrangian nodes.
        weight: Kernel weight.

    Returns:
        W per grid node.
    """
    shifted = weight_eval(weight, lines.rule.nodes + state.phi[:, None])
    integrand = (lines.omega0 + lines.f1 * state.mem[:, None]) * shifted
    return lines.rule.integrate(integrand)


def omega_profile(W: np.ndarray, weight: Weight, grid: Grid1D) -> np.ndarray:
    """Integrate W from the right edge of the grid.

    Args:
        W: Inner profile per node.
        weight: Kernel (only its prefactor is used).
        grid: The z1 grid.

    Returns:
        Omega per node; ``Omega[-1] == 0`` and ``Omega[0]`` is the Omega(-inf) proxy.
    """
    tail = cumulative_trapezoid(W[::-1], dx=grid.h, initial=0.0)[::-1]
    return weight.prefactor * tail


def line_sup(lines: LineData, mem: np.ndarray, *, polish: bool = True) -> np.ndarray:
    """Maximum of ``|omega0 + f1 * mem|`` over the label on every line.

    The scan uses the quadrature nodes refined 4x; with ``polish`` a golden-section
    search refines each discrete argmax within its neighbouring cells.

    Args:
        lines: Tabulated data (must carry its ``InitialData``).
        mem: Memory integral per line.
        polish: Whether to refine beyond the scan.

    Returns:
        Per-line maxima.
    """
    if lines.data is None:
        return np.max(np.abs(lines.omega0 + lines.f1 * mem[:, None]), axis=1)
    a = lines.rule.nodes[:, 0]
    b = lines.rule.nodes[:, -1]
    n_scan = SCAN_REFINEMENT * (lines.rule.n_u - 1) + 1
    frac = np.linspace(0.0, 1.0, n_scan)
    u = a[:, None] + (b - a)[:, None] * frac[None, :]
    values = np.abs(lines.line_values(u, mem))
    k = np.argmax(values, axis=1)
    rows = np.arange(values.shape[0])
    best = values[rows, k]
    if not polish:
        return best

    lo = u[rows, np.maximum(k - 1, 0)]
    hi = u[rows, np.minimum(k + 1, n_scan - 1)]

    def g(x: np.ndarray) -> np.ndarray:
        return np.abs(lines.line_values(x[:, None], mem))[:, 0]

    c = hi - _INV_GOLDEN * (hi - lo)
    d = lo + _INV_GOLDEN * (hi - lo)
    gc, gd = g(c), g(d)
    for _ in range(GOLDEN_ITERATIONS):
        left = gc > gd
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
        c_new = hi - _INV_GOLDEN * (hi - lo)
        d_new = lo + _INV_GOLDEN * (hi - lo)
        # Reuse the surviving interior point; evaluate only the new one
        c, d = np.where(left, c_new, d), np.where(left, c, d_new)
        g_new = g(np.where(left, c, d))
        gc, gd = np.where(left, g_new, gd), np.where(left, gc, g_new)
    return np.maximum(best, np.maximum(gc, gd))


def direct_omega_x(
    data: InitialData,
    eta: float,
    weight: Weight,
    field_name: FieldName = FieldName.OMEGA0,
    n: int = 801,
) -> float:
    """Evaluate ``Omega(eta)`` of a static field directly in the x-frame.

    ``int_{y1 y2 >= eta} f(y) k(y) dy`` with ``k = 1 / |y|^2`` for the sech
    kernel and ``y1 y2 / |y|^4`` for sech squared, by 2-D Simpson over the
    support box.

    Args:
        data: Initial data.
        eta: Hyperbola level ``x1 x2``.
        weight: Kernel selection.
        field_name: Field to integrate.
        n: Odd node count per direction.

    Returns:
        The integral.
    """
    x1_lo, x1_hi, x2_lo, x2_hi = data.strip.box_x
    y1 = np.linspace(x1_lo, x1_hi, n)
    lower = np.clip(np.maximum(x2_lo, eta / y1), None, x2_hi)
    frac = np.linspace(0.0, 1.0, n)
    y2 = lower[:, None] + (x2_hi - lower)[:, None] * frac[None, :]
    y1g = np.broadcast_to(y1[:, None], y2.shape)
    r2 = y1g * y1g + y2 * y2
    kernel = 1.0 / r2 if weight.kind == KernelKind.SECH else y1g * y2 / (r2 * r2)
    values = data.evaluate(field_name, y1g, y2, Frame.X) * kernel
    inner = simpson(values, dx=1.0, axis=1) * (x2_hi - lower) / (n - 1)
    return float(simpson(inner, x=y1))


def tail_bound(state: "SolverState", disc: Discretization) -> float:
    """Bound the Omega contribution lost left of ``Zmin``.

    ``2 M e^{Zmin + K + L}`` with ``M`` the node-wise vorticity bound and ``L = sup |Phi|``.
    """
    M = float(np.max(disc.lines.omega0_absmax + disc.lines.f1_absmax * state.mem))
    if M == 0.0:
        return 0.0
    L = float(np.max(np.abs(state.phi)))
    exponent = disc.grid.z_min + disc.data.strip.K + L
    # exp overflows past ~709
    return 2.0 * M * math.exp(min(exponent, 700.0))
