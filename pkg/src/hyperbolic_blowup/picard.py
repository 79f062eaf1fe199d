"""
Fixed-point iteration for Phi on a space-time grid, used as an independent check of the evolver.

Iterate n builds the vorticity from the previous phase Phi_{n-1},
integrates it against the kernel into Omega_n and sets
Phi_n = 2 * int_0^t Omega_n ds (trapezoid on a uniform time grid).
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from hyperbolic_blowup.constants import (
    DEFAULT_PICARD_CEILING,
    DEFAULT_PICARD_GAP_TOL,
    DEFAULT_PICARD_MAX_ITER,
    DEFAULT_PICARD_N_T,
)
from hyperbolic_blowup.errors import ShapeMismatchError
from hyperbolic_blowup.evolver import SolverState
from hyperbolic_blowup.quadrature import Discretization, LineData, inner_profile_W, omega_profile

logger = logging.getLogger(__name__)

GRID_LIMITATION = "gap suprema are taken over the truncated z1 grid and sampled time slices, not the half-plane"


@dataclass(frozen=True)
class SpaceTimeField:
    """Values on the z1 grid times a uniform time grid."""

    t: np.ndarray
    values: np.ndarray  # shape (n_z1, n_t + 1)

    def __post_init__(self) -> None:
        if self.values.ndim != 2 or self.values.shape[1] != self.t.size:
            raise ShapeMismatchError(f"field of shape {self.values.shape} does not match {self.t.size} time nodes")

    def at(self, t: float) -> np.ndarray:
        """Profile at time t, linearly interpolated between time nodes."""
        j = int(np.clip(np.searchsorted(self.t, t), 1, self.t.size - 1))
        t0, t1 = self.t[j - 1], self.t[j]
        w = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
        return (1.0 - w) * self.values[:, j - 1] + w * self.values[:, j]


@dataclass
class IterationReport:
    """Running suprema and gaps of the iterates.

    ``M``, ``L`` and ``Gamma`` hold one time profile per iterate: the running
    supremum over earlier iterates and earlier times of ``|omega_n|``, ``|Phi_n|``
    and ``|Omega_n|``.
    """

    t: np.ndarray
    M: list[np.ndarray] = field(default_factory=list)
    L: list[np.ndarray] = field(default_factory=list)
    Gamma: list[np.ndarray] = field(default_factory=list)
    omega_gaps: list[float] = field(default_factory=list)
    phi_gaps: list[float] = field(default_factory=list)
    converged: bool = False
    iterations_used: int = 0
    diverged: bool = False
    ceiling: float = DEFAULT_PICARD_CEILING
    limitation: str = GRID_LIMITATION

    @property
    def M_final(self) -> list[float]:
        return [float(m[-1]) for m in self.M]

    @property
    def L_final(self) -> list[float]:
        return [float(v[-1]) for v in self.L]

    @property
    def Gamma_final(self) -> list[float]:
        return [float(g[-1]) for g in self.Gamma]


def iterate_gap(omega_n: np.ndarray, omega_prev: np.ndarray) -> np.ndarray:
    """Gap profile ``G(z1) = sup_{z1' >= z1} sup_{z2} |omega_n - omega_prev|``.

    Args:
        omega_n: Samples with z1 along axis 0.
        omega_prev: Samples at the same points.

    Returns:
        G per z1 node; ``G[0]`` is the overall gap.

    Raises:
        ShapeMismatchError: If the shapes differ.
    """
    omega_n = np.asarray(omega_n, dtype=float)
    omega_prev = np.asarray(omega_prev, dtype=float)
    if omega_n.shape != omega_prev.shape:
        raise ShapeMismatchError(f"iterates of shape {omega_n.shape} and {omega_prev.shape}")
    diff = np.abs(omega_n - omega_prev)
    pointwise = diff.reshape(diff.shape[0], -1).max(axis=1) if diff.ndim > 1 else diff
    return np.maximum.accumulate(pointwise[::-1])[::-1]


def _omega_pair(
    lines: LineData, phi_a: np.ndarray, mem_a: np.ndarray, phi_b: np.ndarray, mem_b: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Two vorticity iterates sampled on the union of their Lagrangian point sets."""
    u = lines.rule.nodes
    on_a = lines.omega0 + lines.f1 * mem_a[:, None]
    on_b = lines.omega0 + lines.f1 * mem_b[:, None]
    b_at_a = lines.line_values(u + (phi_a - phi_b)[:, None], mem_b)
    a_at_b = lines.line_values(u + (phi_b - phi_a)[:, None], mem_a)
    return np.concatenate((on_a, a_at_b), axis=1), np.concatenate((b_at_a, on_b), axis=1)


def _memory(phi: np.ndarray, t: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return cumulative_trapezoid(np.exp(0.5 * phi), t, axis=1, initial=0.0)


def _running_max(previous: list[np.ndarray], current: np.ndarray) -> np.ndarray:
    profile = np.maximum.accumulate(current)
    return np.maximum(previous[-1], profile) if previous else profile


def picard_solve(
    disc: Discretization,
    T: float,
    *,
    n_t: int = DEFAULT_PICARD_N_T,
    max_iter: int = DEFAULT_PICARD_MAX_ITER,
    gap_tol: float = DEFAULT_PICARD_GAP_TOL,
    ceiling: float = DEFAULT_PICARD_CEILING,
    gap_stride: int = 16,
) -> tuple[SpaceTimeField, IterationReport]:
    """Iterate to a fixed point for Phi on ``[0, T]``.

    Args:
        disc: Discretization.
        T: Time horizon.
        n_t: Number of time steps.
        max_iter: Iteration cap.
        gap_tol: Stop once ``sup |Phi_n - Phi_{n-1}|`` is at most this.
        ceiling: Divergence is declared once ``M_n`` exceeds this.
        gap_stride: Every ``gap_stride``-th time slice enters the vorticity gap.

    Returns:
        The last Phi iterate and the iteration report.
    """
    if T < 0:
        raise ValueError(f"T must be nonnegative, got {T!r}")
    if n_t < 1:
        raise ValueError(f"n_t must be positive, got {n_t!r}")
    lines, weight, grid = disc.lines, disc.weight, disc.grid
    t = np.linspace(0.0, T, n_t + 1)
    slices = np.unique(np.append(np.arange(0, n_t + 1, max(1, gap_stride)), n_t))
    report = IterationReport(t=t, ceiling=ceiling)

    phi_prev = np.zeros((len(grid), n_t + 1))
    mem_prev = _memory(phi_prev, t)
    phi_older: np.ndarray | None = None
    mem_older: np.ndarray | None = None
    for it in range(1, max_iter + 1):
        Omega = np.empty_like(phi_prev)
        omega_sup = np.empty(n_t + 1)
        for j in range(n_t + 1):
            state = SolverState(float(t[j]), phi_prev[:, j], mem_prev[:, j])
            Omega[:, j] = omega_profile(inner_profile_W(state, lines, weight), weight, grid)
            omega_sup[j] = np.max(np.abs(lines.omega0 + lines.f1 * mem_prev[:, j, None]))
        phi_new = 2.0 * cumulative_trapezoid(Omega, t, axis=1, initial=0.0)

        report.M.append(_running_max(report.M, omega_sup))
        report.Gamma.append(_running_max(report.Gamma, np.max(np.abs(Omega), axis=0)))
        report.L.append(_running_max(report.L, np.max(np.abs(phi_new), axis=0)))
        report.iterations_used = it

        if phi_older is not None and mem_older is not None:
            G = np.zeros(len(grid))
            for j in slices:
                a, b = _omega_pair(lines, phi_prev[:, j], mem_prev[:, j], phi_older[:, j], mem_older[:, j])
                G = np.maximum(G, iterate_gap(a, b))
            report.omega_gaps.append(float(G[0]))

        finite = bool(np.all(np.isfinite(phi_new)))
        if not finite or report.M[-1][-1] > ceiling:
            report.diverged = True
            logger.warning(
                f"picard iteration {it} diverged: M_n={report.M[-1][-1]:.3e} (ceiling {ceiling:.1e}), "
                f"window T={T!r} too large"
            )
            phi_prev = phi_new
            break

        gap = float(np.max(np.abs(phi_new - phi_prev)))
        report.phi_gaps.append(gap)
        logger.debug(f"picard iteration {it}: phi gap {gap:.3e}")
        phi_older, mem_older = phi_prev, mem_prev
        phi_prev, mem_prev = phi_new, _memory(phi_new, t)
        if gap <= gap_tol:
            report.converged = True
            break

    logger.info(
        f"picard: {report.iterations_used} iterations, converged={report.converged}, diverged={report.diverged}"
    )
    return SpaceTimeField(t, phi_prev), report


@dataclass(frozen=True)
class AprioriChecks:
    """Numerical checks of the iterate bounds.

    Attributes:
        phase_bound_ok: ``L_n(t) <= 2 int_0^t Gamma_n`` for every iterate.
        phase_margin: Largest ``L_n - 2 int Gamma_n`` (nonpositive when the bound holds).
        phase_tolerance: Time-grid error allowance (full versus half grid trapezoid).
        c_values: Fitted ``max_t Gamma_n / ((1 + L_{n-1}) M_n)`` per iterate.
        c_stable: Whether the last three fitted values stay within 20% of each other.
        c_spread: Relative spread of the last three fitted values.
    """

    phase_bound_ok: bool
    phase_margin: float
    phase_tolerance: float
    c_values: list[float | None]
    c_stable: bool
    c_spread: float


def _half_grid_integral(values: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Trapezoid integral on every other node, linearly filled back onto the full grid."""
    coarse = cumulative_trapezoid(values[::2], t[::2], initial=0.0)
    return np.interp(t, t[::2], coarse)


def apriori_monitor(report: IterationReport) -> AprioriChecks:
    """Check the phase and stream-factor bounds along the iteration.

    Args:
        report: A populated iteration report.

    Returns:
        Pass/fail flags with margins.
    """
    t = report.t
    margin = -np.inf
    tolerance = 0.0
    for L, Gamma in zip(report.L, report.Gamma, strict=True):
        integral = 2.0 * cumulative_trapezoid(Gamma, t, initial=0.0)
        if t.size >= 3:
            tolerance = max(tolerance, float(np.max(np.abs(integral - 2.0 * _half_grid_integral(Gamma, t)))))
        margin = max(margin, float(np.max(L - integral)))
    phase_margin = 0.0 if margin == -np.inf else margin
    phase_ok = phase_margin <= tolerance + 1e-12 * max([1.0, *(float(v[-1]) for v in report.L)])

    c_values: list[float | None] = []
    for n, (M, Gamma) in enumerate(zip(report.M, report.Gamma, strict=True)):
        L_prev = report.L[n - 1] if n > 0 else np.zeros_like(M)
        active = M > 0
        c_values.append(float(np.max(Gamma[active] / ((1.0 + L_prev[active]) * M[active]))) if active.any() else None)

    tail = [c for c in c_values[-3:] if c is not None]
    if tail:
        spread = (max(tail) - min(tail)) / max(tail) if max(tail) > 0 else 0.0
    else:
        spread = 0.0
    return AprioriChecks(
        phase_bound_ok=phase_ok,
        phase_margin=phase_margin,
        phase_tolerance=tolerance,
        c_values=c_values,
        c_stable=spread <= 0.2,
        c_spread=spread,
    )
