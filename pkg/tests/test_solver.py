import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_force_lasso, random_psd
from sparsedep.processes import DesignSpec, generate_design, stream
from sparsedep.quadform import QuadraticObjective, RegressionData, build_regression_objective
from sparsedep.solver import SolverOptions, kkt_residual, soft_threshold, solve, solve_path


def random_objective(rng, p, extra=3):
    H = random_psd(rng, p, extra)
    return QuadraticObjective.from_hessian(H, rng.standard_normal(p), 0.0)


@pytest.mark.parametrize("x,t,expected", [(0, 1, 0), (3, 1, 2), (-0.5, 1, 0), (-3, 1, -2)])
def test_soft_threshold(x, t, expected):
    assert soft_threshold(x, t) == expected


def test_soft_threshold_negative_threshold():
    with pytest.raises(ValueError):
        soft_threshold(1.0, -0.1)


def test_large_lambda_gives_zero():
    obj = random_objective(np.random.default_rng(0), 5)
    sol = solve(obj, obj.lambda_max)
    assert sol.converged
    assert np.all(sol.theta == 0)


def test_zero_lambda_matches_least_squares():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((40, 6))
    Y = rng.standard_normal(40)
    sol = solve(build_regression_objective(RegressionData(X, Y)), 0.0)
    ls = np.linalg.solve(X.T @ X, X.T @ Y)
    np.testing.assert_allclose(sol.theta, ls, atol=1e-6)


def test_p6_lambda_03_matches_orthant_enumeration():
    rng = np.random.default_rng(6)
    obj = random_objective(rng, 6)
    best, _ = brute_force_lasso(obj.gram, obj.linear, 0.3)
    sol = solve(obj, 0.3)
    assert sol.objective_value - obj.constant == pytest.approx(best, abs=1e-6)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.floats(0.0, 1.0))
def test_kkt_and_objective_consistency(seed, p, lam):
    obj = random_objective(np.random.default_rng(seed), p)
    sol = solve(obj, lam)
    assert sol.converged
    assert sol.kkt_residual <= 1e-7
    assert kkt_residual(obj, sol.theta_scaled, lam) == sol.kkt_residual
    again = obj.risk_original(sol.theta) + lam * np.abs(sol.theta_scaled).sum()
    assert sol.objective_value == pytest.approx(again, rel=1e-9, abs=1e-12)


def test_objective_nonincreasing_across_sweeps():
    obj = random_objective(np.random.default_rng(3), 12, extra=-4)
    sol = solve(obj, 0.05, SolverOptions(record_objective=True))
    assert np.all(np.diff(sol.history) <= 1e-12)


def test_nonconvergence_is_reported_not_raised():
    obj = random_objective(np.random.default_rng(4), 20, extra=-10)
    sol = solve(obj, 1e-4, SolverOptions(max_iterations=1))
    assert not sol.converged
    assert sol.iterations == 1


def test_nan_and_negative_lambda_rejected():
    obj = random_objective(np.random.default_rng(5), 3)
    with pytest.raises(ValueError):
        solve(obj, -1.0)
    with pytest.raises(ValueError):
        solve(obj, float("nan"))


def test_path_matches_cold_starts():
    obj = random_objective(np.random.default_rng(7), 8)
    lams = np.linspace(obj.lambda_max * 1.1, 0.01, 12)
    path = solve_path(obj, lams)
    assert np.all(path[0].theta == 0)
    for lam, sol in zip(lams, path):
        cold = solve(obj, lam)
        assert sol.objective_value == pytest.approx(cold.objective_value, abs=1e-8)
        assert sol.kkt_residual <= 1e-7
    single = solve_path(obj, [0.2])[0]
    assert single.objective_value == pytest.approx(solve(obj, 0.2).objective_value, abs=1e-12)


def test_path_requires_decreasing():
    obj = random_objective(np.random.default_rng(8), 3)
    with pytest.raises(ValueError):
        solve_path(obj, [0.1, 0.2])


def test_rescaling_round_trip():
    # scaled solve == unscaled problem with per-coordinate penalty lam / scale_j
    rng = np.random.default_rng(9)
    X = rng.standard_normal((25, 4)) * np.array([1.0, 5.0, 0.2, 2.0])
    Y = rng.standard_normal(25)
    obj = build_regression_objective(RegressionData(X, Y))
    lam = 0.1
    sol = solve(obj, lam)
    H = obj.hessian_original
    b = -(2 / 25) * X.T @ Y
    w = lam / obj.column_scale
    grad = H @ sol.theta + b
    act = sol.theta != 0
    np.testing.assert_allclose(grad[act], -w[act] * np.sign(sol.theta[act]), atol=1e-6)
    assert np.all(np.abs(grad[~act]) <= w[~act] + 1e-6)


def test_support_recovery_on_toy_instance():
    n, p = 30, 50
    theta = np.zeros(p)
    theta[[0, 1, 4]] = [3, 1.5, 2]
    hits = 0
    for r in range(100):
        X = generate_design(DesignSpec(n, p, 0.5), rng=stream(11, r, 0))
        Y = X @ theta + stream(11, r, 1).standard_normal(n)
        scale = np.sqrt(Y @ Y / n)
        sol = solve(build_regression_objective(RegressionData(X, Y / scale)),
                    0.2 * np.sqrt(np.log(p) / n), SolverOptions(max_iterations=100000))
        hits += {0, 1, 4} <= set(sol.support.tolist())
    assert hits >= 90
