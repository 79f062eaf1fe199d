"""
Time integration of the reduced system dPhi/dt = 2 Omega, dI/dt = exp(Phi / 2).

Embedded Dormand-Prince 5(4) pair with first-same-as-last reuse, plus the run
loop with sampling, invariant monitoring and stop conditions.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import StrEnum
from typing import TYPE_CHECKING

import numpy as np

from hyperbolic_blowup.constants import (
    BLOWUP_FIT_DECADE,
    BLOWUP_FIT_MIN_SAMPLES,
    BLOWUP_GROWTH_RATIO,
    DEFAULT_DT_MIN,
    DEFAULT_PHI_THRESHOLD,
    FRONT_EDGE_CELLS,
    INVARIANT_SLACK,
    STEP_GROWTH_MAX,
    STEP_SAFETY,
    STEP_SHRINK_MIN,
    TAIL_WARNING_RATIO,
)
from hyperbolic_blowup.diagnostics import (
    DiagnosticsSeries,
    FrontParams,
    ProfileSnapshot,
    SampleRecord,
    delta_at,
    gamma_estimate,
    h_profile_and_fronts,
    sup_norm_omega,
)
from hyperbolic_blowup.errors import BlowupFitError, IntegrationError, StepCollapseError
from hyperbolic_blowup.quadrature import Discretization, inner_profile_W, omega_profile, tail_bound

if TYPE_CHECKING:
    from hyperbolic_blowup.config import IntegratorConfig, SamplingConfig, ScenarioConfig

logger = logging.getLogger(__name__)

# Dormand-Prince 5(4) tableau; the last row of A is the 5th-order solution
_A: tuple[tuple[float, ...], ...] = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip((*_A[6], 0.0), _B4, strict=True))


class StopKind(StrEnum):
    """Why a run ended."""

    TIME_REACHED = "time_reached"
    PHI_THRESHOLD = "phi_threshold"
    STEP_COLLAPSE = "step_collapse"
    FRONT_HIT_LEFT_EDGE = "front_hit_left_edge"


@dataclass(frozen=True)
class StopStatus:
    """Stop status with the triggering time and values."""

    kind: StopKind
    t: float
    values: dict[str, float] = field(default_factory=dict)

    @property
    def is_blowup(self) -> bool:
        return self.kind != StopKind.TIME_REACHED


@dataclass(frozen=True)
class SolverState:
    """Phase Phi and memory integral I on the grid at time t."""

    t: float
    phi: np.ndarray
    mem: np.ndarray

    @classmethod
    def initial(cls: type["SolverState"], n: int) -> "SolverState":
        return cls(0.0, np.zeros(n), np.zeros(n))

    @property
    def phi_left(self) -> float:
        return float(self.phi[0])


@dataclass(frozen=True)
class AcceptedStep:
    """Result of one accepted adaptive step.

    ``derivative`` is the right-hand side at the new state and seeds the next step.
    """

    state: SolverState
    dt_used: float
    dt_next: float
    error_norm: float
    rejected: int
    derivative: np.ndarray

    @property
    def omega(self) -> np.ndarray:
        return 0.5 * self.derivative[0]


def rhs(state: SolverState, disc: Discretization) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate ``(dPhi/dt, dI/dt)``.

    Args:
        state: Current state.
        disc: Data, grid and kernel.

    Returns:
        ``2 Omega`` and ``exp(Phi / 2)`` per node.

    Raises:
        IntegrationError: If the state holds a non-finite value.
    """
    bad = ~(np.isfinite(state.phi) & np.isfinite(state.mem))
    if bad.any():
        raise IntegrationError("non-finite state", node=int(np.argmax(bad)))
    W = inner_profile_W(state, disc.lines, disc.weight)
    omega = omega_profile(W, disc.weight, disc.grid)
    with np.errstate(over="ignore"):
        dmem = np.exp(0.5 * state.phi)
    return 2.0 * omega, dmem


def _derivative(y: np.ndarray, disc: Discretization) -> np.ndarray:
    return np.stack(rhs(SolverState(0.0, y[0], y[1]), disc))


def step_adaptive(
    state: SolverState,
    disc: Discretization,
    tol: float,
    dt: float,
    *,
    dt_min: float = DEFAULT_DT_MIN,
    t_stop: float | None = None,
    k1: np.ndarray | None = None,
) -> AcceptedStep:
    """Take one error-controlled step, retrying with smaller steps as needed.

    The error of ``(Phi, I)`` is measured against ``tol * (1 + |y|)`` in the max norm.

    Args:
        state: State to advance.
        disc: Discretization.
        tol: Absolute and relative tolerance.
        dt: Proposed step.
        dt_min: Smallest admissible step.
        t_stop: Time the step must not pass; a step clipped to it lands on it exactly.
        k1: Right-hand side at ``state`` if already known.

    Returns:
        The accepted step.

    Raises:
        StepCollapseError: If the step size falls below ``dt_min``.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    y = np.stack((state.phi, state.mem))
    if k1 is None:
        k1 = _derivative(y, disc)
    rejected = 0
    while True:
        if dt < dt_min:
            raise StepCollapseError(state.t, dt)
        clipped = t_stop is not None and state.t + dt >= t_stop
        h = t_stop - state.t if clipped else dt
        ks = [k1]
        try:
            for row in _A[1:]:
                stage = y + h * sum(a * k for a, k in zip(row, ks, strict=True) if a != 0.0)
                ks.append(_derivative(stage, disc))
        except IntegrationError as e:
            logger.debug(f"trial step dt={h:.3e} left the finite range ({e}); retrying")
            err_norm = math.inf
        else:
            y_new = stage
            err = h * sum(e * k for e, k in zip(_E, ks, strict=True) if e != 0.0)
            scale = tol * (1.0 + np.maximum(np.abs(y), np.abs(y_new)))
            err_norm = float(np.max(np.abs(err) / scale))
            if not math.isfinite(err_norm):
                err_norm = math.inf

        if err_norm == 0.0:
            factor = STEP_GROWTH_MAX
        elif math.isinf(err_norm):
            factor = STEP_SHRINK_MIN
        else:
            factor = min(STEP_GROWTH_MAX, max(STEP_SHRINK_MIN, STEP_SAFETY * err_norm**-0.2))

        if err_norm <= 1.0:
            t_new = t_stop if clipped else state.t + h
            dt_next = max(dt, h * factor) if clipped else h * factor
            logger.debug(f"step t={t_new:.9g} dt={h:.3e} err={err_norm:.3e}")
            return AcceptedStep(
                state=SolverState(t_new, y_new[0], y_new[1]),
                dt_used=h,
                dt_next=dt_next,
                error_norm=err_norm,
                rejected=rejected,
                derivative=ks[-1],
            )
        rejected += 1
        dt = h * min(factor, 1.0)


def _at_or_past(t: float, target: float) -> bool:
    return t >= target - 1e-12 * max(1.0, abs(target))


class Evolver:
    """Owns one run: state, sampling and stop logic."""

    def __init__(
        self,
        disc: Discretization,
        integrator: "IntegratorConfig",
        sampling: "SamplingConfig",
        fronts: FrontParams,
        extra_times: tuple[float, ...] = (),
    ) -> None:
        self.disc = disc
        self.extra_times = tuple(sorted(extra_times))
        self.integrator = integrator
        self.sampling = sampling
        self.fronts = fronts
        self.series = DiagnosticsSeries()
        self._last_sample_phi = 0.0
        self._tail_warned = False
        self._warned: set[str] = set()
        self._last_F2: float | None = None

    def run(self) -> DiagnosticsSeries:
        """Integrate until a stop condition and return the recorded series."""
        cfg = self.integrator
        grid = self.disc.grid
        state = SolverState.initial(len(grid))
        logger.info(f"run start: T={cfg.t_final!r}, tol={cfg.tol!r}, n_z1={len(grid)}")
        if cfg.t_final <= 0:
            self.series.status = StopStatus(StopKind.TIME_REACHED, 0.0)
            return self.series

        try:
            k = _derivative(np.stack((state.phi, state.mem)), self.disc)
        except IntegrationError as e:
            raise e.at_time(state.t) from e
        omega = 0.5 * k[0]
        self._record(state, omega)

        dt = min(cfg.dt_initial, cfg.t_final)
        next_sample = self.sampling.dt
        pending = [t for t in self.extra_times if 0.0 < t < cfg.t_final]
        status: StopStatus | None = None
        while status is None:
            target = min(next_sample, pending[0] if pending else math.inf, cfg.t_final)
            try:
                step = step_adaptive(state, self.disc, cfg.tol, dt, dt_min=cfg.dt_min, t_stop=target, k1=k)
            except StepCollapseError as e:
                status = StopStatus(StopKind.STEP_COLLAPSE, state.t, {"dt": e.dt, "phi_left": state.phi_left})
                if not _at_or_past(self.series.records[-1].t, state.t):
                    self._record(state, omega)
                break

            self.series.steps += 1
            self.series.rejected += step.rejected
            self._check_invariants(state, step.state, step.omega)
            state, k, dt, omega = step.state, step.derivative, step.dt_next, step.omega
            self._track_tail(state, omega)

            fronts = h_profile_and_fronts(state, grid, self.fronts)
            self._check_front(state.t, fronts.F2)
            status = self._stop_status(state, fronts.H, fronts.F2)
            sample_due = _at_or_past(state.t, target)
            if sample_due:
                while _at_or_past(state.t, next_sample):
                    next_sample += self.sampling.dt
                while pending and _at_or_past(state.t, pending[0]):
                    pending.pop(0)
            growth = (1.0 + self.sampling.phi_growth) * self._last_sample_phi
            grown = self._last_sample_phi > 0 and state.phi_left >= growth
            if status is not None or sample_due or grown:
                self._record(state, omega)

        self.series.status = status
        logger.info(
            f"run stop: {status.kind} at t={status.t:.9g} after {self.series.steps} steps "
            f"({self.series.rejected} rejected), {len(self.series)} samples"
        )
        return self.series

    def _stop_status(self, state: SolverState, H: np.ndarray, F2: float | None) -> StopStatus | None:
        cfg = self.integrator
        grid = self.disc.grid
        threshold = DEFAULT_PHI_THRESHOLD if cfg.phi_threshold is None else cfg.phi_threshold
        if state.phi_left >= threshold:
            return StopStatus(StopKind.PHI_THRESHOLD, state.t, {"phi_left": state.phi_left})
        edge = grid.nodes[min(FRONT_EDGE_CELLS, len(grid) - 1)]
        if (F2 is not None and F2 <= edge) or (F2 is None and H[0] > 0):
            return StopStatus(
                StopKind.FRONT_HIT_LEFT_EDGE,
                state.t,
                {"F2": math.nan if F2 is None else F2, "phi_left": state.phi_left},
            )
        if _at_or_past(state.t, cfg.t_final):
            return StopStatus(StopKind.TIME_REACHED, state.t, {"phi_left": state.phi_left})
        return None

    def _violation(self, kind: str, message: str) -> None:
        setattr(self.series.invariants, kind, getattr(self.series.invariants, kind) + 1)
        if kind not in self._warned:
            self._warned.add(kind)
            logger.warning(f"invariant {kind} violated: {message}")
        else:
            logger.debug(f"invariant {kind} violated: {message}")

    def _check_invariants(self, old: SolverState, new: SolverState, omega: np.ndarray) -> None:
        """Count monotonicity violations beyond ``INVARIANT_SLACK * tol`` (relative to magnitude)."""
        slack = INVARIANT_SLACK * self.integrator.tol
        h = self.disc.grid.h

        def allowance(v: np.ndarray) -> np.ndarray:
            return slack * np.maximum(1.0, np.abs(v))

        if np.any(new.phi < old.phi - allowance(old.phi)):
            self._violation("phi_time", f"Phi decreased in time at t={new.t:.9g}")
        if np.any(np.diff(new.phi) > allowance(new.phi[:-1])):
            self._violation("phi_space", f"Phi increased in z1 at t={new.t:.9g}")
        if np.any(new.mem < old.mem - allowance(old.mem)):
            self._violation("mem_time", f"I decreased in time at t={new.t:.9g}")
        if np.any(np.diff(new.phi) / h > slack):
            self._violation("h_slope", f"dH/dz1 above 1 + {slack:.1e} at t={new.t:.9g}")
        if np.any(np.diff(omega) > allowance(omega[:-1])):
            self._violation("omega_space", f"Omega increased in z1 at t={new.t:.9g}")

    def _check_front(self, t: float, F2: float | None) -> None:
        """Count steps where F2 moved right beyond ``INVARIANT_SLACK * tol`` (relative to magnitude)."""
        last = self._last_F2
        if F2 is not None and last is not None:
            allowance = INVARIANT_SLACK * self.integrator.tol * max(1.0, abs(last))
            if F2 > last + allowance:
                self._violation("f2_time", f"F2 increased from {last:.9g} to {F2:.9g} at t={t:.9g}")
        if F2 is not None:
            self._last_F2 = F2

    def _track_tail(self, state: SolverState, omega: np.ndarray) -> float:
        bound = tail_bound(state, self.disc)
        tail = self.series.tail
        tail.max_bound = max(tail.max_bound, bound)
        logger.debug(f"tail bound {bound:.3e} at t={state.t:.9g}")
        if bound > 0.0 and bound > TAIL_WARNING_RATIO * float(omega[0]):
            tail.exceed_count += 1
            if tail.first_exceed_t is None:
                tail.first_exceed_t = state.t
            if not self._tail_warned:
                self._tail_warned = True
                logger.warning(
                    f"left-tail bound {bound:.3e} exceeds {TAIL_WARNING_RATIO:g} * Omega(Zmin) at t={state.t:.9g}"
                )
        return bound

    def _record(self, state: SolverState, omega: np.ndarray) -> None:
        series = self.series
        fronts = h_profile_and_fronts(state, self.disc.grid, self.fronts)
        sup = sup_norm_omega(state, self.disc)
        bkm = 0.0
        if series.records:
            last = series.records[-1]
            bkm = last.bkm + 0.5 * (last.sup_omega + sup) * (state.t - last.t)
        L = float(np.max(np.abs(state.phi)))
        series.records.append(
            SampleRecord(
                t=state.t,
                phi_left=state.phi_left,
                sup_omega=sup,
                bkm=bkm,
                F1=fronts.F1,
                F2=fronts.F2,
                delta=delta_at(state.phi, self.disc),
                gamma_est=gamma_estimate(omega, fronts.H, self.disc.grid, self.fronts),
                tail_bound=tail_bound(state, self.disc),
                omega_left=float(omega[0]),
                gronwall_ratio=math.log1p(L) / bkm if bkm > 0 else None,
            )
        )
        series.profiles.append(ProfileSnapshot(state.t, state.phi.copy(), state.mem.copy(), omega.copy()))
        self._last_sample_phi = state.phi_left


def run(config: "ScenarioConfig") -> tuple[DiagnosticsSeries, StopStatus]:
    """Run a scenario to its stop status.

    Raises:
        ConfigValidationError: If the config is invalid.
        IntegrationError: If the state stops being finite; annotated with the time.
    """
    from hyperbolic_blowup.scenarios import discretize

    disc, fronts = discretize(config)
    series = Evolver(disc, config.integrator, config.sampling, fronts, config.output.snapshot_times).run()
    if series.status is None:
        raise RuntimeError("run finished without a stop status")
    return series, series.status


@dataclass(frozen=True)
class BlowupEstimate:
    """Extrapolated blow-up time."""

    tb: float
    method: str
    uncertainty: float


def growth_rates(t: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    """Return the mean growth rates of ``values`` over the first and second half of ``t``."""
    t_mid = 0.5 * (float(t[0]) + float(t[-1]))
    mid = float(np.interp(t_mid, t, values))
    early = (mid - float(values[0])) / (t_mid - float(t[0]))
    late = (float(values[-1]) - mid) / (float(t[-1]) - t_mid)
    return early, late


def estimate_blowup_time(series: DiagnosticsSeries) -> BlowupEstimate:
    """Extrapolate the blow-up time from the growth of ``phi_left``.

    ``1 / phi_left`` is fitted linearly in t over the final decade of growth
    (samples with ``phi_left >= phi_final / 10``) and its root is the estimate.
    The fit is only trusted when the growth rate over the second half of that
    window is at least ``BLOWUP_GROWTH_RATIO`` times the rate over the first half;
    a front reaching the grid edge under linear growth gives no estimate.

    Args:
        series: Series of a run that ended with a blow-up status.

    Returns:
        The estimate; ``method`` is ``"reciprocal_linear"``, or ``"last_step"``
        with infinite uncertainty when too few samples fall in the decade.

    Raises:
        BlowupFitError: If the run did not end in blow-up or the fit shows no divergence.
    """
    if series.status is None or not series.status.is_blowup:
        kind = None if series.status is None else series.status.kind
        raise BlowupFitError(f"run ended with status {kind}; no blow-up to extrapolate")
    phi = series.column("phi_left")
    t = series.column("t")
    t_last = float(t[-1])
    window = (phi > 0) & (phi >= phi[-1] / BLOWUP_FIT_DECADE)
    if np.count_nonzero(window) < BLOWUP_FIT_MIN_SAMPLES:
        return BlowupEstimate(t_last, "last_step", math.inf)
    t_fit, phi_fit = t[window], phi[window]
    slope, intercept = np.polyfit(t_fit, 1.0 / phi_fit, 1)
    if not slope < 0:
        raise BlowupFitError(f"1/phi_left is not decreasing (slope {slope!r})")
    early, late = growth_rates(t_fit, phi_fit)
    if not late > BLOWUP_GROWTH_RATIO * max(early, 0.0):
        raise BlowupFitError(f"phi_left growth is not superlinear (rate {early:.6g} then {late:.6g})")
    tb = float(-intercept / slope)
    return BlowupEstimate(tb, "reciprocal_linear", abs(tb - t_last))
