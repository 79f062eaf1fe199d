"""
Batch operations behind the CLI verbs: single runs, refinement studies and the Picard cross-check.
"""

import dataclasses
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from hyperbolic_blowup.config import ScenarioConfig
from hyperbolic_blowup.constants import (
    GROWTH_FIT_START_FRACTION,
    INVARIANT_SLACK,
    KN_GRID_NODES,
    PICARD_COMPARE_SAMPLES,
)
from hyperbolic_blowup.diagnostics import (
    DiagnosticsSeries,
    FrontParams,
    Quantity,
    delta_and_bkm,
    front_law_checks,
    growth_fit,
    reconstruct,
)
from hyperbolic_blowup.errors import BlowupFitError, GrowthFitError, HyperbolicBlowupError
from hyperbolic_blowup.evolver import BlowupEstimate, Evolver, StopStatus, estimate_blowup_time, growth_rates
from hyperbolic_blowup.fields import FieldName, Frame, kn_components
from hyperbolic_blowup.picard import AprioriChecks, IterationReport, apriori_monitor, picard_solve
from hyperbolic_blowup.quadrature import Discretization
from hyperbolic_blowup.scenarios import discretize
from hyperbolic_blowup.writers import (
    MANIFEST_FILE,
    SERIES_FILE,
    SNAPSHOT_FILE,
    select_snapshots,
    write_manifest,
    write_series,
    write_snapshots,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunOutputs:
    """Files written by one run, with the in-memory results."""

    series_path: Path
    snapshot_path: Path | None
    manifest_path: Path
    series: DiagnosticsSeries
    status: StopStatus
    estimate: BlowupEstimate | None


def _blowup_estimate(series: DiagnosticsSeries) -> BlowupEstimate | None:
    try:
        return estimate_blowup_time(series)
    except BlowupFitError as e:
        logger.info(f"no blow-up time: {e}")
        return None


def _fit_results(series: DiagnosticsSeries, quantity: Quantity, t_start: float) -> dict[str, float | None]:
    try:
        fit = growth_fit(series, quantity, t_start)
    except GrowthFitError as e:
        logger.info(f"no {quantity} growth fit: {e}")
        return {f"{quantity}_rate": None, f"{quantity}_fit_quality": None}
    return {f"{quantity}_rate": fit.rate, f"{quantity}_fit_quality": fit.quality}


def _kn_results(series: DiagnosticsSeries, disc: Discretization, delta: float) -> dict[str, float | None]:
    """Norm components of the final vorticity on the box its support is transported into."""
    profile = series.profiles[-1]
    _, x1_hi, _, x2_hi = disc.data.strip.box_x
    x2_top = x2_hi * math.exp(min(0.5 * float(np.max(profile.phi)), 700.0))
    x1_axis = np.linspace(0.5 * delta, x1_hi, KN_GRID_NODES)
    x2_axis = np.linspace(0.0, x2_top, KN_GRID_NODES)
    x1, x2 = np.meshgrid(x1_axis, x2_axis, indexing="ij")
    field = reconstruct(FieldName.OMEGA0, profile, disc, Frame.X, x1, x2)
    kn = kn_components(field.values, x1_axis, x2_axis)
    if kn.empty_support:
        return {"kn_cn_final": kn.cn_estimate, "kn_support_measure_final": 0.0, "kn_inv_delta_final": None}
    return {
        "kn_cn_final": kn.cn_estimate,
        "kn_support_measure_final": kn.support_measure,
        "kn_inv_delta_final": kn.inv_delta,
    }


def history_results(
    series: DiagnosticsSeries, disc: Discretization, fronts: FrontParams, tol: float
) -> dict[str, float | int | str | None]:
    """Run the history diagnostics of a finished run for the manifest.

    Covers the support distance and BKM integral, growth fits of ``phi_left`` and
    ``1 / delta`` from ``GROWTH_FIT_START_FRACTION`` of the stop time, the front
    laws and the norm components of the final vorticity.

    Args:
        series: Series of a finished run.
        disc: Discretization of the run.
        fronts: Front thresholds of the run.
        tol: Integrator tolerance.

    Returns:
        Flat ``result.`` entries; absent values are ``None``.
    """
    if not series.profiles:
        return {}
    sup_omega = series.column("sup_omega")
    delta, bkm = delta_and_bkm(series.profiles, sup_omega, disc)
    t = series.column("t")
    results: dict[str, float | int | str | None] = {
        "bkm_final": float(bkm[-1]),
        "inv_delta_final": 1.0 / float(delta[-1]),
        "bkm_rate_ratio": None,
    }
    if len(t) >= 3 and t[-1] > t[0]:
        early, late = growth_rates(t, bkm)
        results["bkm_rate_ratio"] = late / early if early > 0 else None

    t_start = GROWTH_FIT_START_FRACTION * float(t[-1])
    results.update(_fit_results(series, Quantity.PHI_LEFT, t_start))
    results.update(_fit_results(series, Quantity.INV_DELTA, t_start))

    laws = front_law_checks(series.profiles, disc.grid, fronts, INVARIANT_SLACK * tol, sup_omega=sup_omega)
    results.update(
        {
            "front_laws_partial": str(laws.partial).lower(),
            "front_laws_slope_ok": str(laws.slope_ok).lower(),
            "front_laws_slope_positive_everywhere": str(laws.slope_positive_everywhere).lower(),
            "front_laws_gamma_positive": str(laws.gamma_positive).lower(),
            "front_laws_tail_ok": str(laws.tail_ok).lower(),
            "front_laws_phase_ok": str(laws.phase_ok).lower(),
            "front_laws_t0": laws.t0,
            "front_laws_eps_model": laws.eps_model,
            "front_laws_gamma_min": laws.gamma_min,
        }
    )
    results.update(_kn_results(series, disc, float(delta[-1])))
    return results


def run_scenario(config: ScenarioConfig, out_dir: Path | None = None) -> RunOutputs:
    """Run one scenario and write its outputs.

    Args:
        config: A resolved config.
        out_dir: Output directory; defaults to ``config.output.dir``.

    Returns:
        Paths of the written files and the run results.

    Raises:
        OSError: If the output directory cannot be written.
    """
    out = Path(out_dir if out_dir is not None else config.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    disc, fronts = discretize(config)
    series = Evolver(disc, config.integrator, config.sampling, fronts, config.output.snapshot_times).run()
    status = series.status
    if status is None:
        raise RuntimeError("run finished without a stop status")
    estimate = _blowup_estimate(series)

    last = series.records[-1] if series.records else None
    results: dict[str, float | int | str | None] = {
        "phi_left_final": last.phi_left if last else 0.0,
        "sup_omega_final": last.sup_omega if last else 0.0,
        "gronwall_ratio_final": last.gronwall_ratio if last else None,
        "tb": estimate.tb if estimate else None,
        "tb_method": estimate.method if estimate else "",
        "tb_uncertainty": estimate.uncertainty if estimate else None,
    }
    results.update(history_results(series, disc, fronts, config.integrator.tol))

    series_path = out / SERIES_FILE
    write_series(series_path, series)
    snapshot_path = None
    if config.output.snapshot_times:
        snapshot_path = out / SNAPSHOT_FILE
        write_snapshots(snapshot_path, select_snapshots(series, config.output.snapshot_times), disc)
    manifest_path = out / MANIFEST_FILE
    write_manifest(manifest_path, config, series, results)
    logger.info(f"run outputs written to {out}")
    return RunOutputs(series_path, snapshot_path, manifest_path, series, status, estimate)


def refined(config: ScenarioConfig, factor: int) -> ScenarioConfig:
    """Scale grids by ``factor`` and the tolerance by ``factor ** -4``."""
    if factor < 1:
        raise ValueError(f"refinement factor must be a positive integer, got {factor!r}")
    grid = dataclasses.replace(
        config.grid, n_z1=config.grid.n_z1 * factor, n_u=(config.grid.n_u - 1) * factor + 1
    )
    integrator = dataclasses.replace(config.integrator, tol=config.integrator.tol * float(factor) ** -4)
    return dataclasses.replace(config, grid=grid, integrator=integrator)


@dataclass(frozen=True)
class LevelResult:
    """Outcome of one refinement level."""

    factor: int
    status: str
    times: np.ndarray
    phi_left: np.ndarray
    estimate: BlowupEstimate | None


@dataclass(frozen=True)
class Comparison:
    """Pairwise comparison of two refinement levels on their common sample times."""

    coarse: int
    fine: int
    phi_left_sup_diff: float
    common_samples: int
    tb_relative_diff: float | None


@dataclass(frozen=True)
class RefinementTable:
    levels: list[LevelResult]
    comparisons: list[Comparison]


def _run_level(config: ScenarioConfig, factor: int) -> LevelResult:
    level_config = refined(config, factor)
    disc, fronts = discretize(level_config)
    try:
        series = Evolver(disc, level_config.integrator, level_config.sampling, fronts).run()
    except HyperbolicBlowupError as e:
        logger.warning(f"refinement level {factor} failed: {e}")
        return LevelResult(factor, f"failed: {e}", np.zeros(0), np.zeros(0), None)
    kind = str(series.status.kind) if series.status else "unknown"
    logger.info(f"refinement level {factor} finished with {kind}")
    return LevelResult(factor, kind, series.column("t"), series.column("phi_left"), _blowup_estimate(series))


def _compare(a: LevelResult, b: LevelResult, t_max: float | None) -> Comparison:
    common, ia, ib = np.intersect1d(a.times, b.times, return_indices=True)
    keep = common <= t_max if t_max is not None else np.ones(common.size, dtype=bool)
    diff = float(np.max(np.abs(a.phi_left[ia][keep] - b.phi_left[ib][keep]))) if keep.any() else math.nan
    tb_diff = None
    if a.estimate is not None and b.estimate is not None and b.estimate.tb != 0:
        tb_diff = abs(a.estimate.tb - b.estimate.tb) / abs(b.estimate.tb)
    return Comparison(a.factor, b.factor, diff, int(np.count_nonzero(keep)), tb_diff)


def refine_compare(
    config: ScenarioConfig,
    levels: list[int],
    max_workers: int = 1,
    t_max: float | None = None,
) -> RefinementTable:
    """Rerun a scenario at several refinement factors and compare them.

    Args:
        config: A resolved config (level 1).
        levels: Refinement factors, at least two.
        max_workers: Process-pool size; 1 runs the levels in order.
        t_max: Restrict the phi_left comparison to samples up to this time.

    Returns:
        Per-level status and estimates with pairwise differences, ordered by level.
    """
    if len(levels) < 2:
        raise ValueError(f"refine_compare needs at least two levels, got {levels!r}")
    if max_workers > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            futures = [pool.submit(_run_level, config, f) for f in levels]
            results = []
            for factor, future in zip(levels, futures, strict=True):
                try:
                    results.append(future.result())
                except Exception as e:
                    logger.warning(f"refinement level {factor} failed: {e}")
                    results.append(LevelResult(factor, f"failed: {e}", np.zeros(0), np.zeros(0), None))
    else:
        results = [_run_level(config, f) for f in levels]
    comparisons = [_compare(a, b, t_max) for a, b in zip(results, results[1:], strict=False)]
    return RefinementTable(results, comparisons)


@dataclass(frozen=True)
class PicardAgreement:
    """Cross-check of evolver and Picard phases on a short window."""

    window: float
    discrepancy: float
    compared_times: list[float]
    report: IterationReport
    checks: AprioriChecks

    @property
    def diverged(self) -> bool:
        return self.report.diverged


def picard_validate(config: ScenarioConfig, window: float | None = None) -> PicardAgreement:
    """Run the evolver and the Picard iteration on ``[0, window]`` and compare Phi.

    Args:
        config: A resolved config.
        window: Time window; defaults to ``config.picard.window``.

    Returns:
        The sup discrepancy of Phi over the compared times with the iteration report.
        A diverged iteration gives an infinite discrepancy.
    """
    T = config.picard.window if window is None else window
    disc, fronts = discretize(config)
    p = config.picard
    phi_field, report = picard_solve(
        disc, T, n_t=p.n_t, max_iter=p.max_iter, gap_tol=p.gap_tol, ceiling=p.ceiling
    )
    checks = apriori_monitor(report)
    if report.diverged:
        logger.warning(f"picard diverged on [0, {T!r}]; window too large for the existence guarantee")
        return PicardAgreement(T, math.inf, [], report, checks)

    integrator = dataclasses.replace(config.integrator, t_final=T)
    # Cadence samples only, so every compared time is a Picard time node
    sampling = dataclasses.replace(
        config.sampling, dt=T / PICARD_COMPARE_SAMPLES if T > 0 else 1.0, phi_growth=math.inf
    )
    series = Evolver(disc, integrator, sampling, fronts).run()
    if not series.profiles:
        return PicardAgreement(T, 0.0, [], report, checks)
    discrepancy = 0.0
    times = []
    for profile in series.profiles:
        discrepancy = max(discrepancy, float(np.max(np.abs(profile.phi - phi_field.at(profile.t)))))
        times.append(profile.t)
    logger.info(f"picard vs evolver on [0, {T!r}]: sup discrepancy {discrepancy:.3e}")
    return PicardAgreement(T, discrepancy, times, report, checks)
