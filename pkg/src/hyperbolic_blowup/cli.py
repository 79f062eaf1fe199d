#!/usr/bin/env python3
"""
CLI entry point for hyperbolic-blowup
"""

import argparse
import logging
import sys
from pathlib import Path

from hyperbolic_blowup.config import ScenarioConfig, load_config, parse_overrides
from hyperbolic_blowup.constants import EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION
from hyperbolic_blowup.errors import ConfigValidationError
from hyperbolic_blowup.runner import picard_validate, refine_compare, run_scenario
from hyperbolic_blowup.utils import format_float, write_key_values

logger = logging.getLogger(__name__)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyperbolic-blowup",
        description="Characteristic solver and blow-up diagnostics for the hyperbolic Boussinesq system",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key=value config file (a run manifest works too)")
    common.add_argument("--out", type=Path, help="Output directory (overrides output.dir)")
    common.add_argument("--scenario", choices=["euler", "boussinesq", "custom"], help="Scenario override")
    common.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE", help="Override a config key"
    )
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug logging")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="Run one scenario and write its outputs")
    refine = sub.add_parser("refine", parents=[common], help="Compare runs at several refinement levels")
    refine.add_argument("--levels", default="1,2", help="Comma-separated refinement factors (default: 1,2)")
    refine.add_argument("--workers", type=int, default=1, help="Levels run concurrently (default: 1)")
    refine.add_argument("--t-max", type=float, help="Compare phi_left only up to this time")
    picard = sub.add_parser("picard-validate", parents=[common], help="Cross-check the evolver with Picard")
    picard.add_argument("--window", type=float, help="Time window (default: picard.window)")
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _load(args: argparse.Namespace) -> ScenarioConfig:
    overrides = parse_overrides(args.overrides)
    if args.scenario:
        overrides["scenario"] = args.scenario
    if args.out:
        overrides["output.dir"] = str(args.out)
    return load_config(args.config, overrides)


def _cmd_run(config: ScenarioConfig) -> None:
    outputs = run_scenario(config)
    print(f"status: {outputs.status.kind} at t={format_float(outputs.status.t)}")
    if outputs.estimate is not None:
        print(f"blow-up time: {format_float(outputs.estimate.tb)} ({outputs.estimate.method})")
    print(f"outputs: {outputs.manifest_path.parent}")


def _cmd_refine(config: ScenarioConfig, args: argparse.Namespace) -> None:
    try:
        levels = [int(part) for part in args.levels.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigValidationError([f"--levels must be comma-separated integers, got {args.levels!r}"]) from e
    if len(levels) < 2:
        raise ConfigValidationError([f"--levels needs at least two factors, got {args.levels!r}"])
    table = refine_compare(config, levels, max_workers=args.workers, t_max=args.t_max)
    out = Path(config.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    entries: list[tuple[str, str]] = []
    for level in table.levels:
        tb = level.estimate.tb if level.estimate else None
        print(f"level {level.factor}: {level.status}, tb={format_float(tb) or '-'}")
        entries += [(f"level.{level.factor}.status", level.status), (f"level.{level.factor}.tb", format_float(tb))]
    for c in table.comparisons:
        print(
            f"{c.coarse}x vs {c.fine}x: sup|dphi_left|={format_float(c.phi_left_sup_diff)} "
            f"over {c.common_samples} samples, tb rel diff={format_float(c.tb_relative_diff) or '-'}"
        )
        key = f"compare.{c.coarse}_{c.fine}"
        entries += [
            (f"{key}.phi_left_sup_diff", format_float(c.phi_left_sup_diff)),
            (f"{key}.common_samples", str(c.common_samples)),
            (f"{key}.tb_relative_diff", format_float(c.tb_relative_diff)),
        ]
    write_key_values(out / "refinement.txt", entries)


def _cmd_picard(config: ScenarioConfig, args: argparse.Namespace) -> None:
    agreement = picard_validate(config, args.window)
    report = agreement.report
    if agreement.diverged:
        print(f"picard diverged on [0, {format_float(agreement.window)}]: window too large")
    else:
        print(f"sup |Phi_evolver - Phi_picard| = {format_float(agreement.discrepancy)}")
    print(f"iterations: {report.iterations_used}, converged: {report.converged}")
    print(f"phase bound holds: {agreement.checks.phase_bound_ok}, fitted C stable: {agreement.checks.c_stable}")
    out = Path(config.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    write_key_values(
        out / "picard.txt",
        [
            ("window", format_float(agreement.window)),
            ("discrepancy", format_float(agreement.discrepancy)),
            ("iterations_used", str(report.iterations_used)),
            ("converged", str(report.converged)),
            ("diverged", str(report.diverged)),
            ("phi_gaps", ",".join(format_float(g) for g in report.phi_gaps)),
            ("omega_gaps", ",".join(format_float(g) for g in report.omega_gaps)),
            ("phase_bound_ok", str(agreement.checks.phase_bound_ok)),
            ("c_stable", str(agreement.checks.c_stable)),
            ("limitation", report.limitation),
        ],
    )


def main(argv: list[str] | None = None) -> int:
    """Execute the hyperbolic-blowup command.

    Returns:
        0 for success, 2 for an invalid config, 3 for a runtime failure.
    """
    args = _build_parser().parse_args(argv)
    _configure_logging(args.verbose)

    try:
        config = _load(args)
        if args.command == "run":
            _cmd_run(config)
        elif args.command == "refine":
            _cmd_refine(config, args)
        else:
            _cmd_picard(config, args)
    except ConfigValidationError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as e:
        print(f"An unexpected error occurred: {e}", file=sys.stderr)
        return EXIT_RUNTIME

    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
