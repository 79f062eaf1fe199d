"""
Diagnostics computed from solver states: field reconstruction, fronts, norms and front laws.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from typing import TYPE_CHECKING

import numpy as np
from scipy.interpolate import PchipInterpolator

from hyperbolic_blowup.constants import GROWTH_FIT_MIN_SAMPLES, SERIES_HEADER
from hyperbolic_blowup.coords import hyperbola_level
from hyperbolic_blowup.errors import GrowthFitError
from hyperbolic_blowup.fields import FieldName, Frame, InitialData, axis_threshold
from hyperbolic_blowup.quadrature import Discretization, Grid1D, line_sup, tail_bound

if TYPE_CHECKING:
    from hyperbolic_blowup.evolver import SolverState, StopStatus

logger = logging.getLogger(__name__)


class Quantity(StrEnum):
    """Series quantities accepted by ``growth_fit``."""

    PHI_LEFT = "phi_left"
    INV_DELTA = "inv_delta"
    GRAD_PROXY = "grad_proxy"


@dataclass(frozen=True)
class FrontParams:
    """Front thresholds.

    Attributes:
        b: Level of the forward front, ``H = -b``.
        k: Strip constant of the data.
        z1_threshold: Axis-mass threshold of omega0 (``None`` without axis mass).
        z2_threshold: Axis-mass threshold of f1 (``None`` without axis mass).
    """

    b: float
    k: float
    z1_threshold: float | None
    z2_threshold: float | None

    @classmethod
    def from_data(cls: type["FrontParams"], data: InitialData, b: float | None = None) -> "FrontParams":
        k = data.strip.K
        if b is None:
            b = max(1.0, k)
        if b < max(1.0, k):
            raise ValueError(f"front level B={b!r} must be at least max(1, K)={max(1.0, k)!r}")
        return cls(
            b=b,
            k=k,
            z1_threshold=axis_threshold(data, FieldName.OMEGA0),
            z2_threshold=axis_threshold(data, FieldName.F1),
        )


@dataclass(frozen=True)
class SampleRecord:
    """One row of the diagnostics series."""

    t: float
    phi_left: float
    sup_omega: float
    bkm: float
    F1: float | None
    F2: float | None
    delta: float
    gamma_est: float | None
    tail_bound: float
    omega_left: float = 0.0
    gronwall_ratio: float | None = None

    def row(self) -> tuple[float | None, ...]:
        """Values in series-header order."""
        return tuple(getattr(self, name) for name in SERIES_HEADER)


@dataclass(frozen=True)
class ProfileSnapshot:
    """Grid profiles kept alongside a sample."""

    t: float
    phi: np.ndarray
    mem: np.ndarray
    omega: np.ndarray


@dataclass
class InvariantCounts:
    """Accepted steps that violated a monotonicity invariant beyond slack."""

    phi_time: int = 0
    phi_space: int = 0
    mem_time: int = 0
    h_slope: int = 0
    omega_space: int = 0
    f2_time: int = 0

    @property
    def total(self) -> int:
        return self.phi_time + self.phi_space + self.mem_time + self.h_slope + self.omega_space + self.f2_time


@dataclass
class TailLog:
    """Running record of the left-tail truncation bound."""

    max_bound: float = 0.0
    exceed_count: int = 0
    first_exceed_t: float | None = None


@dataclass
class DiagnosticsSeries:
    """Samples of one run plus the run-level bookkeeping."""

    records: list[SampleRecord] = field(default_factory=list)
    profiles: list[ProfileSnapshot] = field(default_factory=list)
    status: "StopStatus | None" = None
    invariants: InvariantCounts = field(default_factory=InvariantCounts)
    tail: TailLog = field(default_factory=TailLog)
    steps: int = 0
    rejected: int = 0

    def __len__(self) -> int:
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        """Return one field over all samples; absent values become NaN."""
        return np.array([np.nan if (v := getattr(r, name)) is None else v for r in self.records], dtype=float)


@dataclass(frozen=True)
class Reconstruction:
    """Reconstructed field values."""

    values: np.ndarray
    extrapolated: bool
    tail_bound: float


@dataclass(frozen=True)
class Fronts:
    """H profile and the two fronts of a state."""

    H: np.ndarray
    F1: float | None
    F2: float | None


def _grid_interpolant(grid: Grid1D, values: np.ndarray) -> PchipInterpolator:
    return PchipInterpolator(grid.nodes, values, extrapolate=False)


def _clamped(grid: Grid1D, z1: np.ndarray) -> tuple[np.ndarray, bool]:
    outside = (z1 < grid.z_min) | (z1 > grid.z_max)
    return np.clip(z1, grid.z_min, grid.z_max), bool(np.any(outside))


def reconstruct(
    field_name: FieldName,
    state: "SolverState | ProfileSnapshot",
    disc: Discretization,
    frame: Frame,
    a: np.ndarray,
    b: np.ndarray,
) -> Reconstruction:
    """Evaluate omega or rho at time ``state.t`` through the solution formulas.

    Phi and I are interpolated monotonically on the grid and held constant past
    its edges; any point beyond the edges sets the ``extrapolated`` flag.

    Args:
        field_name: ``FieldName.OMEGA0`` for omega or ``FieldName.RHO0`` for rho.
        state: Solver state.
        disc: Discretization holding the data and grid.
        frame: Frame of ``(a, b)``.
        a: First coordinates (z1 or x1).
        b: Second coordinates (z2 or x2).

    Returns:
        The values with the extrapolation flag and the current tail bound.
    """
    if field_name == FieldName.F1:
        raise ValueError("reconstruct evaluates omega or rho; f1 is not transported")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    z1 = a if frame == Frame.Z else hyperbola_level(a, b)
    z1c, extrapolated = _clamped(disc.grid, z1)
    phi = _grid_interpolant(disc.grid, state.phi)(z1c)
    mem = _grid_interpolant(disc.grid, state.mem)(z1c)
    if frame == Frame.Z:
        p, q = a, b - phi
    else:
        # The characteristic through x started at (x1 e^{Phi/2}, x2 e^{-Phi/2})
        p, q = a * np.exp(0.5 * phi), b * np.exp(-0.5 * phi)
    rho = disc.data.evaluate(FieldName.RHO0, p, q, frame)
    if field_name == FieldName.RHO0:
        values = rho
    else:
        values = disc.data.evaluate(FieldName.OMEGA0, p, q, frame)
        values = values + disc.data.evaluate(FieldName.F1, p, q, frame) * mem
    bound = tail_bound(state, disc) if extrapolated else 0.0
    if extrapolated:
        logger.debug(f"reconstruct: points beyond the grid, tail bound {bound:.3e}")
    return Reconstruction(values, extrapolated, bound)


def _roots(z: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Roots of a nodal profile by linear interpolation between bracketing nodes."""
    exact = z[:-1][g[:-1] == 0.0]
    cross = np.nonzero(g[:-1] * g[1:] < 0.0)[0]
    interp = z[cross] + g[cross] / (g[cross] - g[cross + 1]) * (z[cross + 1] - z[cross])
    tail = z[-1:] if g[-1] == 0.0 else z[:0]
    return np.sort(np.concatenate((exact, interp, tail)))


def h_profile_and_fronts(state: "SolverState | ProfileSnapshot", grid: Grid1D, params: FrontParams) -> Fronts:
    """Compute ``H = z1 + Phi`` with the forward front F1 and the blow-up front F2.

    Args:
        state: Solver state.
        grid: The z1 grid.
        params: Front thresholds.

    Returns:
        The profile and both fronts; an absent front is ``None``.
    """
    H = grid.nodes + state.phi
    f1_roots = _roots(grid.nodes, H + params.b)
    f2_roots = _roots(grid.nodes, H)
    return Fronts(
        H=H,
        F1=float(f1_roots[0]) if f1_roots.size else None,
        F2=float(f2_roots[-1]) if f2_roots.size else None,
    )


def sup_norm_omega(state: "SolverState", disc: Discretization) -> float:
    """Maximum of ``|omega|`` over all grid lines, from the per-line label scan."""
    return float(np.max(line_sup(disc.lines, state.mem)))


def gamma_estimate(omega: np.ndarray, H: np.ndarray, grid: Grid1D, params: FrontParams) -> float | None:
    """Minimum of Omega over ``{z1 <= Z1 : H <= -B}``."""
    if params.z1_threshold is None:
        return None
    mask = (grid.nodes <= params.z1_threshold) & (H <= -params.b)
    if not mask.any():
        return None
    return float(np.min(omega[mask]))


def boundary_samples(disc: Discretization, n: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Sample points on the boundary of the support box, bottom edge included."""
    x1_lo, x1_hi, x2_lo, x2_hi = disc.data.strip.box_x
    s = np.linspace(0.0, 1.0, n)
    x1_edge = x1_lo + (x1_hi - x1_lo) * s
    x2_edge = x2_lo + (x2_hi - x2_lo) * s
    x1 = np.concatenate((x1_edge, x1_edge, np.full(n, x1_lo), np.full(n, x1_hi)))
    x2 = np.concatenate((np.full(n, x2_lo), np.full(n, x2_hi), x2_edge, x2_edge))
    return x1, x2


def delta_at(phi: np.ndarray, disc: Discretization) -> float:
    """Smallest x1 reached at time t by the sampled support-boundary trajectories.

    A sample on ``x2 = 0`` sits at ``z1 = -inf`` and moves with ``Phi(Zmin)``.
    """
    x1, x2 = boundary_samples(disc)
    z1, _ = _clamped(disc.grid, hyperbola_level(x1, x2))
    phase = np.interp(z1, disc.grid.nodes, phi)
    return float(np.min(x1 * np.exp(-0.5 * phase)))


def delta_and_bkm(
    profiles: Sequence[ProfileSnapshot], sup_omega: Sequence[float], disc: Discretization
) -> tuple[np.ndarray, np.ndarray]:
    """Support distance and the BKM integral over a history.

    Args:
        profiles: Profiles at the sample times.
        sup_omega: ``sup |omega|`` at the same times.
        disc: Discretization of the run.

    Returns:
        ``(delta, bkm)`` per sample; bkm is the trapezoid accumulation of sup_omega.
    """
    if len(profiles) != len(sup_omega):
        raise ValueError(f"{len(profiles)} profiles but {len(sup_omega)} sup-norm samples")
    delta = np.array([delta_at(p.phi, disc) for p in profiles])
    if not profiles:
        return delta, np.zeros(0)
    t = np.array([p.t for p in profiles])
    m = np.asarray(sup_omega, dtype=float)
    increments = 0.5 * (m[1:] + m[:-1]) * np.diff(t)
    return delta, np.concatenate(([0.0], np.cumsum(increments)))


@dataclass(frozen=True)
class GrowthFit:
    """Least-squares growth rate of a series quantity."""

    rate: float
    intercept: float
    quality: float
    samples: int


def growth_fit(series: DiagnosticsSeries, quantity: Quantity, t_start: float = 0.0) -> GrowthFit:
    """Fit the growth rate of a series quantity after ``t_start``.

    phi_left is fitted linearly in t; inv_delta and grad_proxy (both ``1/delta``)
    are fitted log-linearly.

    Args:
        series: Run series.
        quantity: Quantity to fit.
        t_start: Start of the fitted window (the transient time t0).

    Returns:
        Slope, intercept and the R^2 quality of the fit.

    Raises:
        GrowthFitError: If fewer than 10 samples lie past ``t_start``.
    """
    t = series.column("t")
    keep = t >= t_start
    if np.count_nonzero(keep) < GROWTH_FIT_MIN_SAMPLES:
        raise GrowthFitError(
            f"{np.count_nonzero(keep)} samples past t={t_start!r}, need {GROWTH_FIT_MIN_SAMPLES}"
        )
    if quantity == Quantity.PHI_LEFT:
        y = series.column("phi_left")[keep]
    else:
        y = -np.log(series.column("delta")[keep])
    x = t[keep]
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    quality = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(residual**2)) / ss_tot
    return GrowthFit(float(slope), float(intercept), quality, int(x.size))


@dataclass(frozen=True)
class FrontLawSample:
    """Front-law measurements at one sample time."""

    t: float
    fronts_present: bool
    slope_min: float
    slope_max: float
    eps_meas: float | None = None
    slope_ok: bool = False
    slope_positive: bool = False
    gamma_est: float | None = None
    omega_gap: float | None = None
    omega_gap_bound: float | None = None
    tail_ok: bool | None = None
    phase_ok: bool | None = None


@dataclass(frozen=True)
class FrontLawReport:
    """Front-law checks over a history.

    ``eps_model`` is ``(1/gamma + t0) e^{K - B}`` with the smallest measured gamma.
    """

    samples: list[FrontLawSample]
    t0: float | None
    eps_model: float | None
    gamma_min: float | None
    gamma_max: float | None

    @property
    def partial(self) -> bool:
        return any(not s.fronts_present for s in self.samples)

    @property
    def slope_ok(self) -> bool:
        return all(s.slope_ok for s in self.samples if s.fronts_present)

    @property
    def slope_positive_everywhere(self) -> bool:
        """True when H increases on the whole grid at every sample."""
        return all(s.slope_positive for s in self.samples)

    @property
    def gamma_positive(self) -> bool:
        after = [s for s in self.samples if self.t0 is not None and s.t >= self.t0]
        return bool(after) and all(s.gamma_est is not None and s.gamma_est > 0 for s in after)

    @property
    def tail_ok(self) -> bool:
        return all(s.tail_ok is not False for s in self.samples)

    @property
    def phase_ok(self) -> bool:
        return all(s.phase_ok is not False for s in self.samples)


def front_law_checks(
    profiles: Sequence[ProfileSnapshot],
    grid: Grid1D,
    params: FrontParams,
    tol: float,
    sup_omega: Sequence[float] | None = None,
) -> FrontLawReport:
    """Check the front laws on recorded profiles.

    Per sample: (a) the discrete slope of H lies in ``[1 - eps_meas, 1 + tol]``
    left of F1 with ``eps_meas < 1`` and stays below ``1 + tol`` everywhere;
    positivity right of F1 is recorded as ``slope_positive`` but not required;
    (b) gamma_est is positive once ``t >= t0``; (c) ``Omega(Zmin) - Omega(F1)``
    stays below ``max(1, |omega|) e^{K-B} / (1 - eps_meas)``; (d) when
    ``F2 < -10``, ``Phi >= |F2| / 2`` on ``[F2, F2 + 1]``.

    Args:
        profiles: Recorded profiles.
        grid: The z1 grid.
        params: Front thresholds.
        tol: Integrator tolerance used as the slope slack.
        sup_omega: ``sup |omega|`` per profile (defaults to 1).

    Returns:
        Per-sample measurements; samples without fronts are flagged.
    """
    h = grid.h
    scale = list(sup_omega) if sup_omega is not None else [1.0] * len(profiles)
    gap_factor = math.exp(params.k - params.b)
    samples: list[FrontLawSample] = []
    t0: float | None = None
    for profile, sup in zip(profiles, scale, strict=True):
        fronts = h_profile_and_fronts(profile, grid, params)
        slope = np.diff(fronts.H) / h
        slope_min = float(np.min(slope))
        slope_max = float(np.max(slope))
        if fronts.F1 is None:
            samples.append(FrontLawSample(profile.t, False, slope_min, slope_max, slope_positive=slope_min > 0.0))
            continue
        left = grid.nodes[1:] <= fronts.F1
        front_slope = slope[left] if left.any() else slope[:1]
        eps_meas = max(0.0, 1.0 - float(np.min(front_slope)))
        slope_ok = slope_max <= 1.0 + tol and eps_meas < 1.0

        if t0 is None and params.z1_threshold is not None:
            if float(np.interp(params.z1_threshold, grid.nodes, fronts.H)) >= 0.0:
                t0 = profile.t
        gamma = gamma_estimate(profile.omega, fronts.H, grid, params)

        omega_f1 = float(np.interp(fronts.F1, grid.nodes, profile.omega))
        gap = float(profile.omega[0]) - omega_f1
        bound = max(1.0, sup) * gap_factor / (1.0 - eps_meas) * (1.0 + tol) if eps_meas < 1.0 else math.inf

        phase_ok = None
        if fronts.F2 is not None and fronts.F2 < -10.0:
            band = (grid.nodes >= fronts.F2) & (grid.nodes <= fronts.F2 + 1.0)
            phase_ok = bool(np.all(profile.phi[band] >= 0.5 * abs(fronts.F2)))

        samples.append(
            FrontLawSample(
                t=profile.t,
                fronts_present=True,
                slope_min=slope_min,
                slope_max=slope_max,
                eps_meas=eps_meas,
                slope_ok=slope_ok,
                slope_positive=slope_min > 0.0,
                gamma_est=gamma,
                omega_gap=gap,
                omega_gap_bound=bound,
                tail_ok=gap <= bound,
                phase_ok=phase_ok,
            )
        )

    gammas = [s.gamma_est for s in samples if s.gamma_est is not None and (t0 is None or s.t >= t0)]
    gamma_min = min(gammas) if gammas else None
    eps_model = None
    if gamma_min is not None and gamma_min > 0 and t0 is not None:
        eps_model = (1.0 / gamma_min + t0) * gap_factor
    report = FrontLawReport(samples, t0, eps_model, gamma_min, max(gammas) if gammas else None)
    if report.partial:
        logger.info(f"front laws: {sum(not s.fronts_present for s in samples)} samples without fronts")
    return report
