"""
Tests for field reconstruction, fronts and the series diagnostics.
"""

import math

import numpy as np
import pytest

from hyperbolic_blowup.config import IntegratorConfig, SamplingConfig
from hyperbolic_blowup.constants import INVARIANT_SLACK, SERIES_HEADER
from hyperbolic_blowup.diagnostics import (
    DiagnosticsSeries,
    FrontParams,
    ProfileSnapshot,
    Quantity,
    SampleRecord,
    delta_and_bkm,
    delta_at,
    front_law_checks,
    gamma_estimate,
    growth_fit,
    h_profile_and_fronts,
    reconstruct,
    sup_norm_omega,
)
from hyperbolic_blowup.errors import GrowthFitError
from hyperbolic_blowup.evolver import Evolver, SolverState
from hyperbolic_blowup.fields import FieldName, Frame, InitialData
from hyperbolic_blowup.quadrature import Discretization, Grid1D, inner_profile_W, omega_profile, tail_bound


def _record(t: float, phi_left: float = 0.0, delta: float = 1.0, gamma: float | None = None) -> SampleRecord:
    return SampleRecord(t, phi_left, 1.0, t, None, None, delta, gamma, 0.0)


def _profile(disc: Discretization, phi: np.ndarray, t: float = 0.0) -> ProfileSnapshot:
    n = len(disc.grid)
    state = SolverState(t, phi, np.zeros(n))
    omega = omega_profile(inner_profile_W(state, disc.lines, disc.weight), disc.weight, disc.grid)
    return ProfileSnapshot(t, phi, np.zeros(n), omega)


def test_front_params_defaults(euler_data: InitialData) -> None:
    """Test the default front level and its lower limit."""
    params = FrontParams.from_data(euler_data)
    assert params.b == pytest.approx(max(1.0, euler_data.strip.K))
    assert params.z1_threshold is not None
    assert params.z2_threshold is None

    with pytest.raises(ValueError, match="at least"):
        FrontParams.from_data(euler_data, b=0.5)


def test_fronts_at_rest(euler_disc: Discretization) -> None:
    """Test that at t = 0 the fronts sit at -B and 0."""
    params = FrontParams.from_data(euler_disc.data)
    fronts = h_profile_and_fronts(SolverState.initial(len(euler_disc.grid)), euler_disc.grid, params)
    assert fronts.F1 == pytest.approx(-params.b, abs=1e-12)
    assert fronts.F2 == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_array_equal(fronts.H, euler_disc.grid.nodes)


def test_constant_phase_shifts_fronts(euler_disc: Discretization) -> None:
    """Test that a constant Phi = c moves both fronts left by c."""
    params = FrontParams.from_data(euler_disc.data)
    n = len(euler_disc.grid)
    fronts = h_profile_and_fronts(SolverState(0.0, np.full(n, 1.5), np.zeros(n)), euler_disc.grid, params)
    assert fronts.F1 == pytest.approx(-params.b - 1.5, abs=1e-12)
    assert fronts.F2 == pytest.approx(-1.5, abs=1e-12)


def test_fronts_absent(euler_disc: Discretization) -> None:
    """Test that fronts outside the grid are reported as absent."""
    params = FrontParams.from_data(euler_disc.data)
    n = len(euler_disc.grid)
    fronts = h_profile_and_fronts(SolverState(0.0, np.full(n, -100.0), np.zeros(n)), euler_disc.grid, params)
    assert fronts.F1 is None
    assert fronts.F2 is None


def test_reconstruct_at_rest_is_initial_data(euler_disc: Discretization) -> None:
    """Test that reconstruction at t = 0 returns omega0."""
    x1 = np.array([2.0, 1.5, 2.5])
    x2 = np.array([0.5, 1.0, 0.1])
    state = SolverState.initial(len(euler_disc.grid))

    rec = reconstruct(FieldName.OMEGA0, state, euler_disc, Frame.X, x1, x2)

    assert not rec.extrapolated
    assert rec.tail_bound == 0.0
    np.testing.assert_allclose(rec.values, euler_disc.data.evaluate(FieldName.OMEGA0, x1, x2, Frame.X))
    assert rec.values[0] > 0.0


def test_reconstruct_frames_agree(boussinesq_disc: Discretization) -> None:
    """Test that x-frame and z-frame reconstruction agree on the same points."""
    grid = boussinesq_disc.grid
    phi = 2.0 * np.exp(-(grid.nodes - grid.z_min) / 4.0)
    state = SolverState(1.0, phi, np.full(len(grid), 0.7))
    x1, x2 = np.meshgrid(np.linspace(0.5, 2.5, 7), np.linspace(0.2, 1.5, 5))
    x1, x2 = x1.ravel(), x2.ravel()
    z1 = np.log(x1) + np.log(x2)
    z2 = np.log(x2) - np.log(x1)

    for field_name in (FieldName.OMEGA0, FieldName.RHO0):
        in_x = reconstruct(field_name, state, boussinesq_disc, Frame.X, x1, x2)
        in_z = reconstruct(field_name, state, boussinesq_disc, Frame.Z, z1, z2)
        np.testing.assert_allclose(in_x.values, in_z.values, rtol=1e-9, atol=1e-14)
        assert in_x.values.max() > 0.0


def test_reconstruct_flags_extrapolation(boussinesq_disc: Discretization) -> None:
    """Test that points left of the grid carry the tail bound."""
    n = len(boussinesq_disc.grid)
    state = SolverState(1.0, np.zeros(n), np.ones(n))
    rec = reconstruct(FieldName.OMEGA0, state, boussinesq_disc, Frame.Z, np.array([-50.0]), np.array([-51.0]))
    assert rec.extrapolated
    assert rec.tail_bound == tail_bound(state, boussinesq_disc)
    assert rec.tail_bound > 0.0

    with pytest.raises(ValueError, match="f1"):
        reconstruct(FieldName.F1, state, boussinesq_disc, Frame.Z, np.array([0.0]), np.array([0.0]))


def test_sup_norm_omega(
    zero_disc: Discretization, euler_disc: Discretization, boussinesq_disc: Discretization
) -> None:
    """Test the vorticity sup-norm for zero, Euler and Boussinesq data."""
    n = len(euler_disc.grid)
    assert sup_norm_omega(SolverState(0.0, np.zeros(n), np.zeros(n)), zero_disc) == 0.0

    at_rest = sup_norm_omega(SolverState(0.0, np.zeros(n), np.zeros(n)), euler_disc)
    assert 0.0 < at_rest <= 1.0 + 1e-12
    # Euler vorticity is transported unchanged
    assert sup_norm_omega(SolverState(1.0, np.full(n, 3.0), np.full(n, 5.0)), euler_disc) == at_rest

    # Boussinesq vorticity is f1 * I
    one = sup_norm_omega(SolverState(1.0, np.zeros(n), np.ones(n)), boussinesq_disc)
    two = sup_norm_omega(SolverState(1.0, np.zeros(n), np.full(n, 2.0)), boussinesq_disc)
    assert one > 0.0
    assert two == pytest.approx(2.0 * one, rel=1e-12)


def test_delta_follows_the_phase(euler_disc: Discretization) -> None:
    """Test the support distance at rest and under a constant phase."""
    n = len(euler_disc.grid)
    assert delta_at(np.zeros(n), euler_disc) == pytest.approx(1.0)
    assert delta_at(np.full(n, 2.0), euler_disc) == pytest.approx(math.exp(-1.0))


def test_delta_and_bkm(euler_disc: Discretization) -> None:
    """Test the BKM accumulation over a history."""
    n = len(euler_disc.grid)
    profiles = [ProfileSnapshot(float(t), np.zeros(n), np.zeros(n), np.zeros(n)) for t in (0.0, 1.0, 2.0)]
    delta, bkm = delta_and_bkm(profiles, [2.0, 2.0, 4.0], euler_disc)
    np.testing.assert_allclose(bkm, [0.0, 2.0, 5.0])
    np.testing.assert_allclose(delta, 1.0)

    with pytest.raises(ValueError):
        delta_and_bkm(profiles, [1.0], euler_disc)


def test_gamma_estimate() -> None:
    """Test the minimum of Omega left of the threshold and the front."""
    grid = Grid1D.from_bounds(-4.0, 4.0, 9)
    omega = np.arange(9.0, 0.0, -1.0)
    H = grid.nodes.copy()

    assert gamma_estimate(omega, H, grid, FrontParams(1.0, 0.5, 0.0, None)) == 6.0
    assert gamma_estimate(omega, H, grid, FrontParams(10.0, 0.5, 0.0, None)) is None
    assert gamma_estimate(omega, H, grid, FrontParams(1.0, 0.5, None, None)) is None


def test_growth_fit_linear_phase() -> None:
    """Test the fitted rate of a linearly growing phi_left."""
    t = np.linspace(0.0, 3.0, 12)
    series = DiagnosticsSeries(records=[_record(float(s), phi_left=3.0 * s + 1.0) for s in t])

    fit = growth_fit(series, Quantity.PHI_LEFT)

    assert fit.rate == pytest.approx(3.0)
    assert fit.intercept == pytest.approx(1.0)
    assert fit.quality == pytest.approx(1.0)
    assert fit.samples == 12


def test_growth_fit_inverse_delta() -> None:
    """Test the log-linear fit of 1 / delta after a transient."""
    t = np.linspace(0.0, 4.0, 21)
    delta = np.where(t < 1.0, 1.0, np.exp(-2.0 * (t - 1.0)))
    series = DiagnosticsSeries(records=[_record(float(s), delta=float(d)) for s, d in zip(t, delta, strict=True)])

    fit = growth_fit(series, Quantity.INV_DELTA, t_start=1.0)
    assert fit.rate == pytest.approx(2.0)
    assert growth_fit(series, Quantity.GRAD_PROXY, t_start=1.0).rate == pytest.approx(fit.rate)

    with pytest.raises(GrowthFitError):
        growth_fit(series, Quantity.INV_DELTA, t_start=3.9)


def test_series_columns() -> None:
    """Test row order and absent values in columns."""
    record = _record(0.5, phi_left=2.0, gamma=None)
    assert record.row() == tuple(getattr(record, name) for name in SERIES_HEADER)
    assert record.row()[:2] == (0.5, 2.0)

    series = DiagnosticsSeries(records=[record, _record(1.0, gamma=0.25)])
    gamma = series.column("gamma_est")
    assert math.isnan(gamma[0])
    assert gamma[1] == 0.25
    assert len(series) == 2


def test_front_laws_at_rest(euler_disc: Discretization) -> None:
    """Test the front-law checks on the rest profile."""
    params = FrontParams.from_data(euler_disc.data)
    profile = _profile(euler_disc, np.zeros(len(euler_disc.grid)))

    report = front_law_checks([profile], euler_disc.grid, params, tol=1e-8)

    assert not report.partial
    assert report.slope_ok
    assert report.tail_ok
    assert report.phase_ok
    sample = report.samples[0]
    assert sample.eps_meas == pytest.approx(0.0, abs=1e-12)
    assert sample.omega_gap is not None and sample.omega_gap >= 0.0


def test_front_laws_flag_missing_fronts(euler_disc: Discretization) -> None:
    """Test that samples without fronts mark the report as partial."""
    params = FrontParams.from_data(euler_disc.data)
    n = len(euler_disc.grid)
    profiles = [_profile(euler_disc, np.zeros(n)), _profile(euler_disc, np.full(n, -100.0), t=1.0)]

    report = front_law_checks(profiles, euler_disc.grid, params, tol=1e-8, sup_omega=[1.0, 1.0])

    assert report.partial
    assert not report.samples[1].fronts_present
    assert report.slope_ok


def test_front_laws_bound_the_slope_left_of_f1(euler_disc: Discretization) -> None:
    """Test that a dip of H right of F1 is reported but does not fail the slope law."""
    params = FrontParams(b=1.0, k=0.0, z1_threshold=None, z2_threshold=None)
    z = euler_disc.grid.nodes
    profile = _profile(euler_disc, np.clip(-2.0 * z, 0.0, 4.0))

    report = front_law_checks([profile], euler_disc.grid, params, tol=1e-8)

    sample = report.samples[0]
    assert sample.fronts_present
    assert sample.slope_min < 0.0
    assert sample.eps_meas == pytest.approx(0.0, abs=1e-9)
    assert sample.slope_ok
    assert not sample.slope_positive
    assert report.slope_ok
    assert not report.slope_positive_everywhere


def test_front_laws_on_euler_history(euler_disc: Discretization) -> None:
    """Test the slope law on the profiles of an Euler run."""
    integrator = IntegratorConfig(tol=1e-8, t_final=2.0)
    params = FrontParams.from_data(euler_disc.data)
    series = Evolver(euler_disc, integrator, SamplingConfig(dt=0.25), params).run()

    report = front_law_checks(
        series.profiles, euler_disc.grid, params, tol=INVARIANT_SLACK * 1e-8, sup_omega=series.column("sup_omega")
    )

    assert report.slope_ok
    assert all(s.slope_positive == (s.slope_min > 0.0) for s in report.samples)
