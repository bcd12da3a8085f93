import itertools

import numpy as np
import pytest
from scipy.linalg import toeplitz

from oracles import random_psd
from sparsedep.repcheck import cone_ratio, in_cone, rep_exact, rep_randomized


def test_identity():
    for p, s in [(4, 2), (6, 3), (8, 4)]:
        assert rep_exact(np.eye(p), s).kappa == pytest.approx(1.0, abs=1e-12)


def test_two_by_two_closed_form():
    for rho in (0.0, 0.3, 0.8, -0.6):
        M = np.array([[1, rho], [rho, 1.0]])
        assert rep_exact(M, 2).kappa == pytest.approx(1 - rho * rho, abs=1e-10)


def test_two_by_two_values():
    for rho, kappa in [(0.5, 0.75), (0.9, 0.19)]:
        M = np.array([[1, rho], [rho, 1.0]])
        assert rep_exact(M, 2).kappa == pytest.approx(kappa, abs=1e-9)
        assert rep_randomized(M, 2).kappa == pytest.approx(kappa, abs=1e-9)


def test_toeplitz_monotone_in_strictness():
    M = toeplitz(0.5 ** np.arange(4))
    assert rep_exact(M, 2).kappa == pytest.approx(0.6, abs=1e-9)
    assert rep_exact(M, 2, strict=False).kappa == pytest.approx(rep_exact(M, 3).kappa)


def test_equicorrelated_is_below_min_eigen_free_bound():
    rho = 0.4
    M = (1 - rho) * np.eye(5) + rho * np.ones((5, 5))
    k = rep_exact(M, 3).kappa
    assert 1 - rho - 1e-10 <= k <= 1.0


def _grid_ratio(M, J, steps=121):
    """Dense grid minimum of the ratio over the cone (p = 3)."""
    g = np.linspace(-4, 4, steps)
    V = np.stack(np.meshgrid(g, g, g, indexing="ij"), axis=-1).reshape(-1, 3)
    mask = np.zeros(3, dtype=bool)
    mask[J] = True
    den = (V[:, mask] ** 2).sum(axis=1)
    ok = (den > 0) & (np.abs(V[:, ~mask]).sum(axis=1) <= 3 * np.abs(V[:, mask]).sum(axis=1))
    V = V[ok]
    return float(np.min(((V @ M) * V).sum(axis=1) / den[ok]))


def test_p3_grid_oracle():
    rng = np.random.default_rng(0)
    for _ in range(3):
        M = random_psd(rng, 3, extra=5)
        d = np.sqrt(np.diag(M))
        M = M / np.outer(d, d)
        est = rep_exact(M, 2)
        grid = min(_grid_ratio(M, J) for J in ([0], [1], [2]))
        assert est.kappa <= grid + 1e-9
        assert grid - est.kappa <= 2e-2 * max(grid, 1e-3)


def test_certificate_is_feasible():
    rng = np.random.default_rng(1)
    M = random_psd(rng, 7, extra=0)
    for est in (rep_exact(M, 4), rep_randomized(M, 4, budget=1000)):
        assert len(est.J) < 4
        assert in_cone(est.v, est.J)
        assert cone_ratio(M, est.v, est.J) == pytest.approx(est.kappa, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("c", [0.5, 2.0])
def test_scaling(c):
    M = toeplitz(0.3 ** np.arange(5))
    assert rep_exact(c * M, 3).kappa == pytest.approx(c * rep_exact(M, 3).kappa, rel=1e-9)


def test_monotone_in_s():
    M = toeplitz(0.6 ** np.arange(6))
    ks = [rep_exact(M, s).kappa for s in (2, 3, 4)]
    assert ks[0] >= ks[1] - 1e-12 >= ks[2] - 2e-12


@pytest.mark.parametrize("p", [4, 6, 8])
def test_randomized_matches_exact(p):
    rng = np.random.default_rng(p)
    M = random_psd(rng, p, extra=1)
    d = np.sqrt(np.diag(M))
    M = M / np.outer(d, d)
    ex = rep_exact(M, 3).kappa
    rz = rep_randomized(M, 3, budget=1000, seed=0).kappa
    assert ex - 1e-9 <= rz <= ex + 1e-6 * max(1.0, ex)


def test_randomized_budget_is_running_minimum():
    rng = np.random.default_rng(3)
    M = random_psd(rng, 20, extra=-5)
    small = rep_randomized(M, 4, budget=1000, seed=2, steps=20).kappa
    large = rep_randomized(M, 4, budget=2000, seed=2, steps=20).kappa
    assert large <= small
    again = rep_randomized(M, 4, budget=1000, seed=2, steps=20)
    assert again.kappa == small


def test_fixed_support_and_non_strict():
    M = toeplitz(0.5 ** np.arange(5))
    full = rep_exact(M, 3, strict=False)
    assert len(full.J) == 3
    fixed = rep_exact(M, 3, support=full.J)
    assert fixed.kappa == pytest.approx(full.kappa, abs=1e-10)
    assert rep_exact(M, 3, strict=False).kappa <= rep_exact(M, 3).kappa + 1e-12


def test_errors():
    with pytest.raises(ValueError):
        rep_exact(np.eye(13), 3)
    with pytest.raises(ValueError):
        rep_exact(np.eye(4), 1)
    with pytest.raises(ValueError):
        rep_exact(np.array([[1, 0.2], [0.3, 1]]), 2)
    with pytest.raises(ValueError):
        rep_randomized(np.eye(4), 2, budget=999)
    with pytest.raises(ValueError):
        rep_exact(np.eye(4), 2, support=[7])


def test_exact_never_above_randomized():
    # includes a case whose minimizer needs an active face on the full support
    from sparsedep.processes import stream
    for seed, i, p in [(88, 6, 8), (7, 14, 7), (7, 35, 8)]:
        rng = stream(seed, i)
        M = random_psd(rng, p, extra=int(rng.integers(-1, 3)))
        d = np.sqrt(np.diag(M))
        M = M / np.outer(d, d)
        s = int(rng.integers(2, min(p, 4) + 1))
        ex = rep_exact(M, s).kappa
        rz = rep_randomized(M, s, seed=i).kappa
        assert ex <= rz + 1e-12
        assert rz - ex <= 1e-3 * ex


def test_cone_projection():
    from sparsedep.repcheck import _project_cone
    rng = np.random.default_rng(0)
    V = rng.standard_normal((200, 6)) * np.r_[0.3, 0.3, 1, 1, 1, 1]
    mask = np.zeros((200, 6), dtype=bool)
    mask[:, :2] = True
    P = _project_cone(V, mask)
    for v, w in zip(V, P):
        assert np.abs(w[2:]).sum() <= 3 * (np.sign(v[:2]) @ w[:2]) + 1e-12
    np.testing.assert_allclose(_project_cone(P, mask), P, atol=1e-12)
    # optimality: the residual is a normal direction of the feasible set
    for v, w in zip(V[:20], P[:20]):
        for _ in range(20):
            z = _project_cone(w[None] + 0.1 * rng.standard_normal((1, 6)), mask[:1])[0]
            if np.any(np.sign(z[:2]) != np.sign(v[:2])):
                continue  # the convex piece is the orthant of v_J
            assert (v - w) @ (z - w) <= 1e-9
