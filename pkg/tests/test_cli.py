"""
Tests for the command-line entry point.
"""

from pathlib import Path
from typing import TYPE_CHECKING
from unittest.mock import MagicMock

import numpy as np
import pytest

from hyperbolic_blowup.cli import main
from hyperbolic_blowup.constants import EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION
from hyperbolic_blowup.evolver import BlowupEstimate
from hyperbolic_blowup.runner import Comparison, LevelResult, RefinementTable
from hyperbolic_blowup.utils import read_key_values

if TYPE_CHECKING:
    from _pytest.capture import CaptureFixture
    from pytest_mock import MockerFixture


@pytest.fixture
def mock_run_scenario(mocker: "MockerFixture", tmp_path: Path) -> MagicMock:
    """Fixture replacing the run with a canned result."""
    outputs = MagicMock()
    outputs.status.kind = "phi_threshold"
    outputs.status.t = 1.5
    outputs.estimate = BlowupEstimate(1.75, "reciprocal_linear", 0.25)
    outputs.manifest_path = tmp_path / "manifest.txt"
    return mocker.patch("hyperbolic_blowup.cli.run_scenario", return_value=outputs)


def test_run_prints_status(capsys: "CaptureFixture", mock_run_scenario: MagicMock, tmp_path: Path) -> None:
    """Test the run verb with overrides."""
    result = main(["run", "--scenario", "euler", "--set", "grid.n_z1=64", "--out", str(tmp_path)])

    assert result == EXIT_OK
    config = mock_run_scenario.call_args.args[0]
    assert config.scenario == "euler"
    assert config.grid.n_z1 == 64
    assert config.output.dir == str(tmp_path)
    out = capsys.readouterr().out
    assert "status: phi_threshold at t=1.5" in out
    assert "blow-up time: 1.75 (reciprocal_linear)" in out


def test_invalid_config_exits_with_validation_code(capsys: "CaptureFixture", mock_run_scenario: MagicMock) -> None:
    """Test that config violations exit with code 2 before running."""
    result = main(["run", "--set", "grid.n_z1=4", "--set", "grid.n_u=4"])

    assert result == EXIT_VALIDATION
    err = capsys.readouterr().err
    assert err.startswith("Error: invalid config:")
    assert "grid.n_z1" in err and "grid.n_u" in err
    mock_run_scenario.assert_not_called()


def test_malformed_override(capsys: "CaptureFixture", mock_run_scenario: MagicMock) -> None:
    """Test that an override without '=' is a validation error."""
    assert main(["run", "--set", "grid.n_z1"]) == EXIT_VALIDATION
    assert "not key=value" in capsys.readouterr().err


def test_missing_config_file(capsys: "CaptureFixture", tmp_path: Path) -> None:
    """Test that an unreadable config file is a runtime failure."""
    result = main(["run", "--config", str(tmp_path / "missing.txt")])
    assert result == EXIT_RUNTIME
    assert capsys.readouterr().err.startswith("Error:")


def test_unexpected_failure(capsys: "CaptureFixture", mocker: "MockerFixture") -> None:
    """Test that any other exception exits with code 3."""
    mocker.patch("hyperbolic_blowup.cli.run_scenario", side_effect=RuntimeError("boom"))
    assert main(["run"]) == EXIT_RUNTIME
    assert "An unexpected error occurred: boom" in capsys.readouterr().err


def test_refine_writes_table(capsys: "CaptureFixture", mocker: "MockerFixture", tmp_path: Path) -> None:
    """Test the refine verb and its summary file."""
    table = RefinementTable(
        levels=[
            LevelResult(1, "phi_threshold", np.zeros(2), np.zeros(2), BlowupEstimate(2.0, "reciprocal_linear", 0.1)),
            LevelResult(2, "failed: boom", np.zeros(0), np.zeros(0), None),
        ],
        comparisons=[Comparison(1, 2, 0.5, 2, None)],
    )
    refine = mocker.patch("hyperbolic_blowup.cli.refine_compare", return_value=table)

    result = main(["refine", "--levels", "1,2", "--workers", "2", "--out", str(tmp_path)])

    assert result == EXIT_OK
    assert refine.call_args.args[1] == [1, 2]
    assert refine.call_args.kwargs["max_workers"] == 2
    entries = read_key_values(tmp_path / "refinement.txt")
    assert entries["level.1.tb"] == "2"
    assert entries["level.2.status"] == "failed: boom"
    assert entries["compare.1_2.phi_left_sup_diff"] == "0.5"
    assert "1x vs 2x" in capsys.readouterr().out


@pytest.mark.parametrize("levels", ["1", "1,x"])
def test_refine_rejects_bad_levels(levels: str, mocker: "MockerFixture") -> None:
    """Test the --levels checks."""
    refine = mocker.patch("hyperbolic_blowup.cli.refine_compare")
    assert main(["refine", "--levels", levels]) == EXIT_VALIDATION
    refine.assert_not_called()


def test_picard_validate_writes_report(capsys: "CaptureFixture", mocker: "MockerFixture", tmp_path: Path) -> None:
    """Test the picard-validate verb."""
    agreement = MagicMock()
    agreement.window = 0.25
    agreement.discrepancy = 1e-9
    agreement.diverged = False
    agreement.report.iterations_used = 7
    agreement.report.converged = True
    agreement.report.diverged = False
    agreement.report.phi_gaps = [1e-3, 1e-6]
    agreement.report.omega_gaps = [1e-4]
    agreement.report.limitation = "sampled grid"
    agreement.checks.phase_bound_ok = True
    agreement.checks.c_stable = True
    validate = mocker.patch("hyperbolic_blowup.cli.picard_validate", return_value=agreement)

    result = main(["picard-validate", "--window", "0.25", "--out", str(tmp_path)])

    assert result == EXIT_OK
    assert validate.call_args.args[1] == 0.25
    entries = read_key_values(tmp_path / "picard.txt")
    assert entries["iterations_used"] == "7"
    assert entries["phi_gaps"] == "0.001,9.9999999999999995e-07"
    assert "sup |Phi_evolver - Phi_picard|" in capsys.readouterr().out
