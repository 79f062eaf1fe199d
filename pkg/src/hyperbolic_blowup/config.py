"""
Scenario configuration: a frozen dataclass tree read from flat ``key=value`` text.
"""

import dataclasses
import logging
import types
import typing
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path

from hyperbolic_blowup.constants import (
    DEFAULT_DT_INITIAL,
    DEFAULT_DT_MIN,
    DEFAULT_N_U,
    DEFAULT_N_Z1,
    DEFAULT_PHI_GROWTH,
    DEFAULT_PICARD_CEILING,
    DEFAULT_PICARD_GAP_TOL,
    DEFAULT_PICARD_MAX_ITER,
    DEFAULT_PICARD_N_T,
    DEFAULT_PICARD_WINDOW,
    DEFAULT_SAMPLE_DT,
    DEFAULT_T_FINAL,
    DEFAULT_TOL,
)
from hyperbolic_blowup.errors import ConfigValidationError
from hyperbolic_blowup.quadrature import KernelKind
from hyperbolic_blowup.utils import format_float, read_key_values

logger = logging.getLogger(__name__)

# Keys under these prefixes appear only in run manifests
MANIFEST_PREFIXES = ("status.", "result.", "invariants.", "tail.")


@dataclass(frozen=True)
class GridConfig:
    z_min: float | None = None  # scenario default when unset
    z_max: float | None = None  # support edge + margin when unset
    n_z1: int = DEFAULT_N_Z1
    n_u: int = DEFAULT_N_U


@dataclass(frozen=True)
class IntegratorConfig:
    tol: float = DEFAULT_TOL
    dt_min: float = DEFAULT_DT_MIN
    dt_initial: float = DEFAULT_DT_INITIAL
    phi_threshold: float | None = None  # scenario default when unset
    t_final: float = DEFAULT_T_FINAL


@dataclass(frozen=True)
class SamplingConfig:
    dt: float = DEFAULT_SAMPLE_DT
    phi_growth: float = DEFAULT_PHI_GROWTH


@dataclass(frozen=True)
class ProfileConfig:
    """Product bump ``amplitude * bump_x1 * bump_x2``; ``amplitude=None`` takes the scenario default."""

    x1_center: float = 2.0
    x1_radius: float = 1.0
    x2_center: float = 0.0
    x2_radius: float = 2.0
    amplitude: float | None = None


@dataclass(frozen=True)
class FrontConfig:
    b: float | None = None  # max(1, K) when unset


@dataclass(frozen=True)
class PicardConfig:
    n_t: int = DEFAULT_PICARD_N_T
    max_iter: int = DEFAULT_PICARD_MAX_ITER
    gap_tol: float = DEFAULT_PICARD_GAP_TOL
    ceiling: float = DEFAULT_PICARD_CEILING
    window: float = DEFAULT_PICARD_WINDOW


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "out"
    snapshot_times: tuple[float, ...] = ()


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete, deterministic description of one run."""

    scenario: str = "boussinesq"
    kernel: KernelKind = KernelKind.SECH
    grid: GridConfig = field(default_factory=GridConfig)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    omega0: ProfileConfig = field(default_factory=ProfileConfig)
    rho0: ProfileConfig = field(default_factory=ProfileConfig)
    front: FrontConfig = field(default_factory=FrontConfig)
    picard: PicardConfig = field(default_factory=PicardConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_entries(self) -> list[tuple[str, str]]:
        """Flatten to dotted ``(key, value)`` pairs in declaration order."""
        entries: list[tuple[str, str]] = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if dataclasses.is_dataclass(value):
                for sub in dataclasses.fields(value):
                    entries.append((f"{f.name}.{sub.name}", _render(getattr(value, sub.name))))
            else:
                entries.append((f.name, _render(value)))
        return entries

    def with_overrides(self, overrides: Mapping[str, str]) -> "ScenarioConfig":
        """Return a copy with dotted keys replaced by parsed values."""
        return from_entries({**dict(self.to_entries()), **overrides})


def _render(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, tuple):
        return ",".join(format_float(v) for v in value)
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def _parse(raw: str, hint: object) -> object:
    """Parse one raw value against a field type hint."""
    raw = raw.strip()
    args = typing.get_args(hint)
    if isinstance(hint, types.UnionType) and type(None) in args:
        if raw.lower() in ("", "none", "default"):
            return None
        (inner,) = (a for a in args if a is not type(None))
        return _parse(raw, inner)
    if typing.get_origin(hint) is tuple:
        return tuple(float(part) for part in raw.split(",") if part.strip())
    if hint is int:
        return int(raw)
    if hint is float:
        return float(raw)
    if hint is KernelKind:
        return KernelKind(raw)
    return raw


def from_entries(entries: Mapping[str, str]) -> ScenarioConfig:
    """Build an unresolved config from dotted keys.

    Args:
        entries: Raw key/value pairs.

    Returns:
        The config, with defaults for absent keys.

    Raises:
        ConfigValidationError: Listing unknown keys and unparsable values.
    """
    violations: list[str] = []
    top_hints = typing.get_type_hints(ScenarioConfig)
    sections: dict[str, dict[str, object]] = {}
    top: dict[str, object] = {}
    for key, raw in entries.items():
        if key.startswith(MANIFEST_PREFIXES):
            continue
        head, _, tail = key.partition(".")
        hint = top_hints.get(head)
        if hint is None:
            violations.append(f"unknown key {key!r}")
            continue
        try:
            if dataclasses.is_dataclass(hint):
                sub_hints = typing.get_type_hints(hint)
                if tail not in sub_hints:
                    violations.append(f"unknown key {key!r}")
                    continue
                sections.setdefault(head, {})[tail] = _parse(raw, sub_hints[tail])
            elif tail:
                violations.append(f"unknown key {key!r}")
            else:
                top[head] = _parse(raw, hint)
        except ValueError as e:
            violations.append(f"{key}: cannot parse {raw!r} ({e})")
    if violations:
        raise ConfigValidationError(violations)
    for head, values in sections.items():
        top[head] = top_hints[head](**values)
    return ScenarioConfig(**top)


def parse_overrides(items: Iterable[str]) -> dict[str, str]:
    """Parse ``key=value`` command-line overrides."""
    overrides: dict[str, str] = {}
    violations = []
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            violations.append(f"override {item!r} is not key=value")
            continue
        overrides[key.strip()] = value.strip()
    if violations:
        raise ConfigValidationError(violations)
    return overrides


def common_violations(config: ScenarioConfig) -> list[str]:
    """Check the scenario-independent invariants."""
    out = []
    g, i, s = config.grid, config.integrator, config.sampling
    if g.n_z1 < 16:
        out.append(f"grid.n_z1 must be at least 16, got {g.n_z1}")
    if g.n_u < 3 or g.n_u % 2 == 0:
        out.append(f"grid.n_u must be odd and at least 3, got {g.n_u}")
    if g.z_min is not None and g.z_max is not None and not g.z_min < g.z_max:
        out.append(f"grid.z_min={g.z_min!r} must be below grid.z_max={g.z_max!r}")
    if not i.tol > 0:
        out.append(f"integrator.tol must be positive, got {i.tol!r}")
    if not 0 < i.dt_min <= i.dt_initial:
        out.append(f"need 0 < integrator.dt_min <= integrator.dt_initial, got {i.dt_min!r}, {i.dt_initial!r}")
    if i.t_final < 0:
        out.append(f"integrator.t_final must be nonnegative, got {i.t_final!r}")
    if i.phi_threshold is not None and not i.phi_threshold > 0:
        out.append(f"integrator.phi_threshold must be positive, got {i.phi_threshold!r}")
    if not s.dt > 0:
        out.append(f"sampling.dt must be positive, got {s.dt!r}")
    if s.phi_growth <= 0:
        out.append(f"sampling.phi_growth must be positive, got {s.phi_growth!r}")
    for name in ("omega0", "rho0"):
        p: ProfileConfig = getattr(config, name)
        if p.x1_radius <= 0 or p.x2_radius <= 0:
            out.append(f"{name} radii must be positive")
        if p.amplitude is not None and p.amplitude < 0:
            out.append(f"{name}.amplitude must be nonnegative, got {p.amplitude!r}")
        if p.amplitude and p.x1_center - p.x1_radius <= 0:
            out.append(f"{name} support must stay away from the x2-axis (x1_center - x1_radius > 0)")
        if p.x2_center + p.x2_radius <= 0:
            out.append(f"{name} support must reach into x2 > 0")
    if config.picard.n_t < 2 or config.picard.max_iter < 1:
        out.append("picard.n_t must be at least 2 and picard.max_iter at least 1")
    if config.picard.window < 0:
        out.append(f"picard.window must be nonnegative, got {config.picard.window!r}")
    return out


def load_config(
    path: Path | None = None,
    overrides: Mapping[str, str] | None = None,
) -> ScenarioConfig:
    """Read, override, resolve and validate a scenario config.

    Args:
        path: Optional ``key=value`` file (a run manifest is accepted).
        overrides: Dotted keys applied after the file.

    Returns:
        The resolved config; scenario defaults are filled in.

    Raises:
        ConfigValidationError: Listing every violated invariant.
        OSError: If the file cannot be read.
    """
    entries: dict[str, str] = {}
    if path is not None:
        try:
            entries = read_key_values(path)
        except ValueError as e:
            raise ConfigValidationError([str(e)]) from e
    entries.update(overrides or {})
    from hyperbolic_blowup.scenarios import resolve

    config = resolve(from_entries(entries))
    logger.info(f"loaded config: scenario={config.scenario}, kernel={config.kernel}")
    return config
