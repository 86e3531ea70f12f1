import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_std
from sdwd.errors import NonConvergenceError
from sdwd.path import lambda_max
from sdwd.solver import (FitState, PenaltySpec, SolverConfig, compute_margins, fit_fixed,
                         kkt_residuals, objective, objective_change, trace_fit,
                         update_coefficient, update_intercept)


def test_penalty_spec():
    pen = PenaltySpec(0.5, 2.0, np.array([1.0, 2.0]))
    assert pen.value(np.array([1.0, -1.0])) == pytest.approx(0.5 * 3 + 2.0)
    with pytest.raises(ValueError):
        PenaltySpec(-1.0)
    with pytest.raises(ValueError):
        PenaltySpec(1.0, weights=np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        pen.weights_for(3)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(tol=0)
    with pytest.raises(ValueError):
        SolverConfig(curvature="newton")


def test_rejects_unstandardized(raw):
    with pytest.raises(ValueError):
        fit_fixed(raw, PenaltySpec(0.1))


def test_single_update_matches_formula(std_data):
    d = std_data
    pen = PenaltySpec(0.05, 0.3)
    state = FitState.zeros(d)
    update_intercept(state, d)
    g = np.mean(np.where(state.margins <= 0.5, -1.0, -0.25 / state.margins ** 2) * d.y * d.x[:, 2])
    z = 4 * state.beta[2] - g
    expect = np.sign(z) * max(abs(z) - 0.05, 0) / 4.3
    assert update_coefficient(state, d, pen, 2) == pytest.approx(expect, abs=1e-15)
    np.testing.assert_allclose(state.margins, compute_margins(d, state.beta0, state.beta), atol=1e-14)


@pytest.mark.parametrize("curvature", ["adaptive", "global"])
@pytest.mark.parametrize("lam2", [0.0, 0.5])
def test_fixed_point_satisfies_kkt(std_data, curvature, lam2):
    d = std_data
    pen = PenaltySpec(0.3 * lambda_max(d), lam2)
    cfg = SolverConfig(tol=1e-24, kkt_tol=1e-11, curvature=curvature)
    s = fit_fixed(d, pen, cfg=cfg)
    assert np.max(kkt_residuals(s, d, pen)) <= 1e-10
    np.testing.assert_allclose(s.margins, compute_margins(d, s.beta0, s.beta), atol=1e-10)


def test_margin_cache_integrity():
    d = make_std(30, 25, seed=3)
    s = fit_fixed(d, PenaltySpec(0.01, 0.1))
    assert np.max(np.abs(s.margins - compute_margins(d, s.beta0, s.beta))) <= 1e-10


def test_init_not_modified(std_data):
    init = FitState.zeros(std_data)
    fit_fixed(std_data, PenaltySpec(0.05), init=init)
    assert not init.beta.any() and init.beta0 == 0.0


def test_beyond_lambda_max_is_null(std_data):
    lmax = lambda_max(std_data)
    s = fit_fixed(std_data, PenaltySpec(lmax * 1.0001))
    assert not s.beta.any()
    assert abs(np.mean(np.where(s.margins <= 0.5, -1, -0.25 / s.margins ** 2) * std_data.y)) < 1e-6


def test_active_set_same_solution():
    d = make_std(40, 30, seed=5)
    pen = PenaltySpec(0.02, 0.1)
    a = fit_fixed(d, pen, cfg=SolverConfig(active_set=True))
    b = fit_fixed(d, pen, cfg=SolverConfig(active_set=False))
    assert np.max(np.abs(a.beta - b.beta)) < 1e-5
    assert objective(a, d, pen) == pytest.approx(objective(b, d, pen), abs=1e-9)


def test_curvature_modes_agree(std_data):
    pen = PenaltySpec(0.02, 1.0)
    a = fit_fixed(std_data, pen)
    b = fit_fixed(std_data, pen, cfg=SolverConfig(curvature="global"))
    assert np.max(np.abs(a.beta - b.beta)) < 1e-5


def test_working_set_freezes_others(std_data):
    s = fit_fixed(std_data, PenaltySpec(0.01), working=np.array([0, 1]))
    assert not s.beta[2:].any()


def test_cycle_cap_raises_with_state(std_data):
    cfg = SolverConfig(max_cycles=1, curvature="global", active_set=False)
    with pytest.raises(NonConvergenceError) as exc:
        fit_fixed(std_data, PenaltySpec(0.001), cfg=cfg)
    assert exc.value.state is not None and exc.value.state.cycles == 1


def test_coordinate_minimizes_along_grid(std_data):
    """No point on a fine grid along any coordinate beats the solution."""
    d = std_data
    pen = PenaltySpec(0.05, 0.2)
    s = fit_fixed(d, pen, cfg=SolverConfig(tol=1e-20, kkt_tol=1e-10))
    f0 = objective(s, d, pen)
    for j in range(d.p):
        for t in np.linspace(-0.05, 0.05, 41):
            trial = FitState.from_coefficients(d, s.beta0, s.beta + t * (np.arange(d.p) == j))
            assert objective(trial, d, pen) >= f0 - 1e-12


def test_kernel_trace_monotone(std_data):
    pen = PenaltySpec(0.02, 0.1)
    s = fit_fixed(std_data, pen, trace_capacity=5000)
    obj, moves = s.trace
    assert obj.size > 0 and moves.size == obj.size
    assert np.max(np.diff(obj)) <= 1e-12


@pytest.mark.parametrize("curvature", ["global", "adaptive"])
def test_trace_fit_increments_negative(std_data, curvature):
    pen = PenaltySpec(0.05, 0.1)
    s, tr = trace_fit(std_data, pen, curvature=curvature)
    a = np.array(tr)
    moved = a[:, 1] > 0
    assert np.all(a[moved, 2] < 0)
    assert np.max(kkt_residuals(s, std_data, pen)) < 1e-3


def test_objective_change_matches_difference():
    rng = np.random.default_rng(0)
    u = rng.uniform(-1, 2, 200)
    col = rng.standard_normal(200)
    for d in (1e-3, -0.4, 0.7):
        exact = np.mean(np.where(u + col * d <= 0.5, 1 - (u + col * d), 0.25 / (u + col * d))) \
            - np.mean(np.where(u <= 0.5, 1 - u, 0.25 / u)) + 0.1 * (abs(0.3 + d) - 0.3)
        assert objective_change(u, col, 0.3, 0.3 + d, 0.1) == pytest.approx(exact, abs=1e-14)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([0.0, 0.1, 1.0]), st.floats(0.05, 0.9))
def test_kkt_random(seed, lam2, frac):
    d = make_std(25, 8, seed=seed)
    pen = PenaltySpec(frac * lambda_max(d), lam2)
    s = fit_fixed(d, pen)
    assert np.max(kkt_residuals(s, d, pen)) <= 1e-5
