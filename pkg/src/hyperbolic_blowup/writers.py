"""
Emission of run outputs: the series table, field snapshots and the run manifest.
"""

import csv
import logging
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np

from hyperbolic_blowup.config import ScenarioConfig
from hyperbolic_blowup.constants import SERIES_HEADER, SNAPSHOT_HEADER, SNAPSHOT_U_STRIDE, SNAPSHOT_Z1_STRIDE
from hyperbolic_blowup.diagnostics import DiagnosticsSeries, ProfileSnapshot, reconstruct
from hyperbolic_blowup.fields import FieldName, Frame
from hyperbolic_blowup.quadrature import Discretization
from hyperbolic_blowup.utils import format_float, write_key_values

logger = logging.getLogger(__name__)

SERIES_FILE = "series.csv"
SNAPSHOT_FILE = "snapshots.txt"
MANIFEST_FILE = "manifest.txt"


def write_series(path: Path, series: DiagnosticsSeries) -> None:
    """Write the series as CSV; absent fronts and estimates are empty fields."""
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SERIES_HEADER)
        for record in series.records:
            writer.writerow([format_float(v) for v in record.row()])
    logger.debug(f"Wrote {len(series)} rows to {path}")


def snapshot_block(profile: ProfileSnapshot, disc: Discretization) -> np.ndarray:
    """Sample omega and rho on a thinned Lagrangian grid.

    Args:
        profile: Recorded profiles at the snapshot time.
        disc: Discretization of the run.

    Returns:
        Rows ``(z1, z2, omega, rho)`` with ``z2 = u + Phi(z1)``.
    """
    rows = slice(None, None, SNAPSHOT_Z1_STRIDE)
    cols = slice(None, None, SNAPSHOT_U_STRIDE)
    u = disc.lines.rule.nodes[rows, cols]
    z1 = np.broadcast_to(disc.grid.nodes[rows, None], u.shape)
    z2 = u + profile.phi[rows, None]
    omega = reconstruct(FieldName.OMEGA0, profile, disc, Frame.Z, z1, z2).values
    rho = reconstruct(FieldName.RHO0, profile, disc, Frame.Z, z1, z2).values
    return np.column_stack([a.ravel() for a in (z1, z2, omega, rho)])


def select_snapshots(series: DiagnosticsSeries, times: Iterable[float]) -> list[ProfileSnapshot]:
    """Pick the recorded profile nearest to each requested time.

    Times past the end of the run are skipped with a warning.
    """
    if not series.profiles:
        return []
    recorded = np.array([p.t for p in series.profiles])
    t_end = series.status.t if series.status is not None else float(recorded[-1])
    picked = []
    for t in times:
        if t > t_end + 1e-12 * max(1.0, abs(t_end)):
            logger.warning(f"snapshot time {t!r} is past the end of the run at t={t_end!r}; skipped")
            continue
        picked.append(series.profiles[int(np.argmin(np.abs(recorded - t)))])
    return picked


def write_snapshots(path: Path, profiles: Sequence[ProfileSnapshot], disc: Discretization) -> None:
    """Write snapshot blocks separated by blank lines, each led by a ``# t=`` comment."""
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        for i, profile in enumerate(profiles):
            if i:
                f.write("\n")
            f.write(f"# t={format_float(profile.t)}\n")
            writer.writerow(SNAPSHOT_HEADER)
            for row in snapshot_block(profile, disc):
                writer.writerow([format_float(v) for v in row])
    logger.debug(f"Wrote {len(profiles)} snapshot blocks to {path}")


def manifest_entries(
    config: ScenarioConfig, series: DiagnosticsSeries, results: dict[str, float | int | str | None]
) -> list[tuple[str, str]]:
    """Config echo followed by status, results, invariant counts and the tail log."""
    entries = config.to_entries()
    status = series.status
    if status is not None:
        entries.append(("status.kind", str(status.kind)))
        entries.append(("status.t", format_float(status.t)))
        entries.extend((f"status.{k}", format_float(v)) for k, v in status.values.items())
    entries.append(("result.samples", str(len(series))))
    entries.append(("result.steps", str(series.steps)))
    entries.append(("result.rejected_steps", str(series.rejected)))
    for key, value in results.items():
        rendered = format_float(value) if isinstance(value, float) or value is None else str(value)
        entries.append((f"result.{key}", rendered))
    inv = series.invariants
    for name in ("phi_time", "phi_space", "mem_time", "h_slope", "omega_space", "f2_time"):
        entries.append((f"invariants.{name}", str(getattr(inv, name))))
    entries.append(("invariants.total", str(inv.total)))
    entries.append(("tail.max_bound", format_float(series.tail.max_bound)))
    entries.append(("tail.exceed_count", str(series.tail.exceed_count)))
    entries.append(("tail.first_exceed_t", format_float(series.tail.first_exceed_t)))
    return entries


def write_manifest(
    path: Path, config: ScenarioConfig, series: DiagnosticsSeries, results: dict[str, float | int | str | None]
) -> None:
    write_key_values(path, manifest_entries(config, series, results))
