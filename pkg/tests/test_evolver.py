"""
Tests for the adaptive integrator, the run loop and blow-up extrapolation.
"""

import math
from typing import TYPE_CHECKING

import numpy as np
import pytest

from hyperbolic_blowup.config import IntegratorConfig, SamplingConfig
from hyperbolic_blowup.diagnostics import DiagnosticsSeries, FrontParams, SampleRecord
from hyperbolic_blowup.errors import BlowupFitError, IntegrationError, StepCollapseError
from hyperbolic_blowup.evolver import (
    Evolver,
    SolverState,
    StopKind,
    StopStatus,
    estimate_blowup_time,
    growth_rates,
    rhs,
    step_adaptive,
)
from hyperbolic_blowup.quadrature import Discretization

if TYPE_CHECKING:
    from pytest_mock import MockerFixture


def _evolver(disc: Discretization, t_final: float, **sampling: float) -> Evolver:
    integrator = IntegratorConfig(tol=1e-8, t_final=t_final)
    return Evolver(disc, integrator, SamplingConfig(**sampling), FrontParams.from_data(disc.data))


def _series(t: np.ndarray, phi: np.ndarray, kind: StopKind) -> DiagnosticsSeries:
    records = [
        SampleRecord(float(a), float(b), 0.0, 0.0, None, None, 1.0, None, 0.0) for a, b in zip(t, phi, strict=True)
    ]
    return DiagnosticsSeries(records=records, status=StopStatus(kind, float(t[-1])))


def test_rhs_at_rest(boussinesq_disc: Discretization) -> None:
    """Test that a state at rest has no phase speed and unit memory growth."""
    dphi, dmem = rhs(SolverState.initial(len(boussinesq_disc.grid)), boussinesq_disc)
    assert np.all(dphi == 0.0)
    assert np.all(dmem == 1.0)


def test_rhs_rejects_non_finite_state(euler_disc: Discretization) -> None:
    """Test that a NaN in the state is reported with its node."""
    n = len(euler_disc.grid)
    phi = np.zeros(n)
    phi[7] = np.nan
    with pytest.raises(IntegrationError) as excinfo:
        rhs(SolverState(0.0, phi, np.zeros(n)), euler_disc)
    assert excinfo.value.node == 7
    assert excinfo.value.at_time(1.5).t == 1.5


def test_step_lands_on_stop_time(zero_disc: Discretization) -> None:
    """Test that a step clipped to t_stop lands on it exactly."""
    step = step_adaptive(SolverState.initial(len(zero_disc.grid)), zero_disc, 1e-8, 1.0, t_stop=0.25)
    assert step.state.t == 0.25
    assert step.dt_used == 0.25
    assert step.rejected == 0
    np.testing.assert_allclose(step.state.mem, 0.25, rtol=1e-14)


def test_step_collapse(zero_disc: Discretization) -> None:
    """Test that a step below dt_min raises."""
    with pytest.raises(StepCollapseError) as excinfo:
        step_adaptive(SolverState.initial(len(zero_disc.grid)), zero_disc, 1e-8, 1e-6, dt_min=1e-3)
    assert excinfo.value.dt == 1e-6
    assert excinfo.value.t == 0.0


def test_frozen_omega_is_integrated_accurately(euler_disc: Discretization, mocker: "MockerFixture") -> None:
    """Test the integrator against the closed form for a frozen Omega."""
    n = len(euler_disc.grid)
    c = 0.5
    mocker.patch("hyperbolic_blowup.evolver.omega_profile", return_value=np.full(n, c))

    state = SolverState.initial(n)
    dt = 1e-3
    k = None
    while state.t < 1.0:
        step = step_adaptive(state, euler_disc, 1e-10, dt, t_stop=1.0, k1=k)
        state, dt, k = step.state, step.dt_next, step.derivative

    assert state.t == 1.0
    np.testing.assert_allclose(state.phi, 2.0 * c, rtol=1e-8)
    np.testing.assert_allclose(state.mem, (math.exp(c) - 1.0) / c, rtol=1e-8)


def test_zero_data_memory_is_time(zero_disc: Discretization) -> None:
    """Test that zero data keeps Phi at zero and I equal to t."""
    series = _evolver(zero_disc, 2.0, dt=0.5).run()

    assert series.status is not None
    assert series.status.kind == StopKind.TIME_REACHED
    assert series.status.t == pytest.approx(2.0)
    np.testing.assert_allclose(series.column("t"), [0.0, 0.5, 1.0, 1.5, 2.0], atol=1e-12)
    assert np.all(series.column("phi_left") == 0.0)
    np.testing.assert_allclose(series.profiles[-1].mem, 2.0, rtol=1e-12)
    assert series.invariants.total == 0
    assert series.tail.max_bound == 0.0


def test_zero_horizon(euler_disc: Discretization) -> None:
    """Test that T = 0 stops immediately without samples."""
    series = _evolver(euler_disc, 0.0).run()
    assert series.status == StopStatus(StopKind.TIME_REACHED, 0.0)
    assert len(series) == 0


def test_euler_run_conserves_sup_norm(euler_disc: Discretization) -> None:
    """Test the Euler run: transported vorticity keeps its sup norm and Phi grows from the left."""
    series = _evolver(euler_disc, 1.0, dt=0.25).run()

    assert series.status is not None
    assert series.status.kind == StopKind.TIME_REACHED
    sup = series.column("sup_omega")
    np.testing.assert_allclose(sup, sup[0], rtol=0.0, atol=1e-14)

    phi_left = series.column("phi_left")
    assert phi_left[0] == 0.0
    assert np.all(np.diff(phi_left) > 0.0)
    last = series.profiles[-1]
    assert np.all(last.phi >= -1e-12)
    assert np.all(np.diff(last.phi) <= 1e-6)
    assert series.records[-1].bkm == pytest.approx(sup[0] * 1.0, rel=1e-9)


def test_boussinesq_run_grows(boussinesq_disc: Discretization) -> None:
    """Test that density forcing builds vorticity and memory from rest."""
    series = _evolver(boussinesq_disc, 1.0, dt=0.5).run()

    sup = series.column("sup_omega")
    assert sup[0] == 0.0
    assert np.all(np.diff(sup) > 0.0)
    assert np.all(np.diff(series.column("phi_left")) >= -1e-12)
    np.testing.assert_allclose(series.profiles[0].mem, 0.0)
    assert np.all(series.profiles[-1].mem >= 1.0 - 1e-9)


def test_extra_times_are_sampled(euler_disc: Discretization) -> None:
    """Test that requested snapshot times are hit exactly."""
    integrator = IntegratorConfig(tol=1e-8, t_final=1.0)
    evolver = Evolver(
        euler_disc, integrator, SamplingConfig(dt=0.5), FrontParams.from_data(euler_disc.data), (0.3, 5.0)
    )
    times = evolver.run().column("t")
    assert 0.3 in times
    assert times[-1] == pytest.approx(1.0)
    assert np.all(np.diff(times) > 0.0)


def test_phi_threshold_stop(euler_disc: Discretization) -> None:
    """Test the phi threshold stop condition."""
    integrator = IntegratorConfig(tol=1e-8, t_final=50.0, phi_threshold=0.05)
    series = Evolver(euler_disc, integrator, SamplingConfig(), FrontParams.from_data(euler_disc.data)).run()

    assert series.status is not None
    assert series.status.kind == StopKind.PHI_THRESHOLD
    assert series.status.is_blowup
    assert series.status.values["phi_left"] >= 0.05
    assert series.records[-1].t == series.status.t


def test_blowup_estimate_from_reciprocal_growth() -> None:
    """Test the extrapolated time on a series with phi_left = 1 / (2 - t)."""
    t = np.linspace(0.0, 1.9, 40)
    series = _series(t, 1.0 / (2.0 - t), StopKind.PHI_THRESHOLD)

    estimate = estimate_blowup_time(series)

    assert estimate.method == "reciprocal_linear"
    assert estimate.tb == pytest.approx(2.0, rel=1e-9)
    assert estimate.uncertainty == pytest.approx(0.1, rel=1e-6)


def test_blowup_estimate_with_few_samples() -> None:
    """Test the last-step fallback when the final decade holds too few samples."""
    series = _series(np.array([0.0, 1.0, 2.0]), np.array([0.0, 0.5, 10.0]), StopKind.FRONT_HIT_LEFT_EDGE)
    estimate = estimate_blowup_time(series)
    assert estimate.method == "last_step"
    assert estimate.tb == 2.0
    assert estimate.uncertainty == math.inf


def test_blowup_estimate_requires_blowup_status() -> None:
    """Test that a run reaching its horizon has no blow-up time."""
    t = np.linspace(0.0, 1.0, 20)
    with pytest.raises(BlowupFitError, match="time_reached"):
        estimate_blowup_time(_series(t, t, StopKind.TIME_REACHED))


def test_blowup_estimate_rejects_decay() -> None:
    """Test that a decaying phi_left gives no finite blow-up time."""
    t = np.linspace(0.0, 5.0, 20)
    with pytest.raises(BlowupFitError, match="not decreasing"):
        estimate_blowup_time(_series(t, 10.0 + np.exp(-t), StopKind.STEP_COLLAPSE))


def test_blowup_estimate_rejects_linear_growth() -> None:
    """Test that a linearly growing phi_left ending at the grid edge gives no blow-up time."""
    t = np.linspace(0.0, 12.0, 49)
    with pytest.raises(BlowupFitError, match="not superlinear"):
        estimate_blowup_time(_series(t, 3.3 * t, StopKind.FRONT_HIT_LEFT_EDGE))


def test_growth_rates() -> None:
    """Test the half-window growth rates of a linear and a quadratic series."""
    t = np.linspace(0.0, 2.0, 21)
    assert growth_rates(t, 3.0 * t) == pytest.approx((3.0, 3.0))
    early, late = growth_rates(t, t * t)
    assert early == pytest.approx(1.0)
    assert late == pytest.approx(3.0)


def test_euler_front_edge_has_no_blowup_time(euler_disc: Discretization) -> None:
    """Test an Euler run stopped by the front reaching a narrow window: linear growth, no estimate."""
    series = _evolver(euler_disc, 50.0, dt=0.25).run()

    assert series.status is not None
    assert series.status.kind == StopKind.FRONT_HIT_LEFT_EDGE
    with pytest.raises(BlowupFitError, match="not superlinear"):
        estimate_blowup_time(series)


def test_front_position_is_monitored(euler_disc: Discretization) -> None:
    """Test the F2 counter: quiet on an Euler run, incremented when F2 moves right."""
    series = _evolver(euler_disc, 1.0, dt=0.25).run()
    assert series.invariants.f2_time == 0
    F2 = series.column("F2")
    assert np.all(np.diff(F2) <= 1e-6)

    evolver = _evolver(euler_disc, 1.0)
    evolver._check_front(0.1, -1.0)
    evolver._check_front(0.2, None)
    evolver._check_front(0.3, -1.0 + 1e-12)
    assert evolver.series.invariants.f2_time == 0
    evolver._check_front(0.4, -0.5)
    assert evolver.series.invariants.f2_time == 1
    assert evolver.series.invariants.total == 1
