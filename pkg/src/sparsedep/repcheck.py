"""Restricted eigenvalue constant of a Gram matrix.

    kappa = inf { v'Mv / ||v_J||^2 : |J| < s, sum_{j not in J} |v_j| <= 3 sum_{j in J} |v_j| }

The ratio only improves as J grows (a larger J enlarges the denominator and
relaxes the cone), so the infimum is attained with |J| as large as allowed.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .processes import stream

__all__ = [
    "RepEstimate",
    "cone_ratio",
    "in_cone",
    "rep_exact",
    "rep_randomized",
    "MAX_EXACT_P",
]

CONE = 3.0
MAX_EXACT_P = 12
FEAS_TOL = 1e-9


@dataclass
class RepEstimate:
    kappa: float
    s: int
    method: str  # "exact" or "randomized"
    J: tuple
    v: np.ndarray
    strict: bool = True

    def as_dict(self):
        return {
            "kappa": self.kappa,
            "s": self.s,
            "method": self.method,
            "strict": self.strict,
            "J": list(self.J),
            "v": [float(x) for x in self.v],
        }


def cone_ratio(M, v, J) -> float:
    v = np.asarray(v, dtype=float)
    J = list(J)
    den = float(v[J] @ v[J])
    if den <= 0:
        raise ValueError("v vanishes on J")
    return float(v @ M @ v) / den


def in_cone(v, J, tol=FEAS_TOL) -> bool:
    v = np.asarray(v, dtype=float)
    mask = np.zeros(v.size, dtype=bool)
    mask[list(J)] = True
    return float(np.abs(v[~mask]).sum()) <= CONE * float(np.abs(v[mask]).sum()) + tol


def _validate(M, s):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("M must be square")
    if not np.all(np.isfinite(M)):
        raise ValueError("M contains NaN or inf")
    if not np.allclose(M, M.T, rtol=0, atol=1e-10 * max(1.0, np.abs(M).max())):
        raise ValueError("M must be symmetric")
    if int(s) != s or s < 1:
        raise ValueError("s must be a positive integer")
    return 0.5 * (M + M.T)


def _subset_size(p, s, strict):
    k = s - 1 if strict else s
    if k < 1:
        raise ValueError("strict |J| < s needs s >= 2 (s = 1 leaves only the empty J)")
    return min(k, p)


def _check_support(support, p):
    J = tuple(sorted({int(j) for j in support}))
    if not J or J[0] < 0 or J[-1] >= p:
        raise ValueError(f"support must be a nonempty subset of 0..{p - 1}")
    return J


def _normalize(v, J):
    v = np.asarray(v, dtype=float)
    nrm = np.sqrt(v[list(J)] @ v[list(J)])
    return v / nrm


def _polish(v, J):
    """Pull a boundary point back inside the cone when roundoff pushes it out."""
    mask = np.zeros(v.size, dtype=bool)
    mask[list(J)] = True
    out_l1 = np.abs(v[~mask]).sum()
    lim = CONE * np.abs(v[mask]).sum()
    if out_l1 > lim:
        v = v.copy()
        v[~mask] *= lim / out_l1
    return v


def _rayleigh_candidates(A, B):
    """Stationary points of x'Ax / x'Bx with A PSD and B PSD (possibly singular)."""
    b, Q = np.linalg.eigh(B)
    keep = b > 1e-12 * max(1.0, b.max())
    R, Z = Q[:, keep], Q[:, ~keep]
    d = b[keep]
    if Z.shape[1]:
        ARR = R.T @ A @ R
        ARZ = R.T @ A @ Z
        AZZ = Z.T @ A @ Z
        W = np.linalg.pinv(AZZ, hermitian=True) @ ARZ.T
        Aeff = ARR - ARZ @ W
    else:
        W = None
        Aeff = R.T @ A @ R
    scale = 1.0 / np.sqrt(d)
    _, vecs = np.linalg.eigh(scale[:, None] * Aeff * scale[None, :])
    Y = scale[:, None] * vecs
    X = R @ Y
    if W is not None:
        X = X - Z @ (W @ Y)
    return X.T


def _complement(a):
    """Orthonormal basis of the hyperplane a'x = 0."""
    q, _ = np.linalg.qr(a[:, None], mode="complete")
    return q[:, 1:]


def _best_for_J(M, J, p, bound=np.inf):
    """Exhaustive enumeration of the faces of the cone for a fixed J.

    Only improvements on ``bound`` are returned.  The unconstrained minimum
    of the ratio on span(e_S) bounds every face inside S from below, which
    prunes most sign patterns.
    """
    J = list(J)
    Jc = [j for j in range(p) if j not in J]
    best = (bound, None)

    def consider(S, x):
        nonlocal best
        v = np.zeros(p)
        v[S] = x
        if not np.any(v[J]):
            return False
        v = _normalize(v, J)
        # feasibility is judged before polishing, which only absorbs roundoff
        if not in_cone(v, J, tol=1e-9 * np.abs(v).sum()):
            return False
        v = _polish(v, J)
        r = cone_ratio(M, v, J)
        if r < best[0]:
            best = (r, v)
        return True

    pending = []
    for ny in range(1, len(J) + 1):
        for Ys in itertools.combinations(J, ny):
            for nz in range(0, len(Jc) + 1):
                for Zs in itertools.combinations(Jc, nz):
                    S = list(Ys) + list(Zs)
                    MS = M[np.ix_(S, S)]
                    P = np.diag([1.0] * ny + [0.0] * nz)
                    # cone constraint inactive on this face
                    X = _rayleigh_candidates(MS, P)
                    feasible_min = False
                    for i, x in enumerate(X):
                        ok = consider(S, x)
                        feasible_min = feasible_min or (i == 0 and ok)
                    if nz and not feasible_min:
                        v = np.zeros(p)
                        v[S] = X[0]
                        pending.append((cone_ratio(M, v, J), S, ny, nz, MS, P))

    # constraint active: sum_Z sigma|x| = 3 sum_Y sigma|x|, first sign fixed
    pending.sort(key=lambda t: t[0])
    for lb, S, ny, nz, MS, P in pending:
        if lb >= best[0] - 1e-12 * abs(best[0]):
            break
        for signs in itertools.product((1.0, -1.0), repeat=ny + nz - 1):
            sig = np.array((1.0,) + signs)
            N = _complement(sig * np.array([-CONE] * ny + [1.0] * nz))
            for y in _rayleigh_candidates(N.T @ MS @ N, N.T @ P @ N):
                consider(S, N @ y)
    return best


def rep_exact(M, s: int, strict: bool = True, support=None) -> RepEstimate:
    """Exact kappa for small p by enumerating every J and every face of the cone.

    On each face (a support pattern, plus a sign pattern when the cone
    constraint binds) the stationary points of the ratio solve a generalized
    eigenproblem; the global minimizer is one of them.  ``support`` fixes J
    instead of enumerating it.  Cost grows like 3^p; p = 12 takes minutes.
    """
    M = _validate(M, s)
    p = M.shape[0]
    if p > MAX_EXACT_P:
        raise ValueError(f"p={p} is too large for exact enumeration (limit {MAX_EXACT_P}); "
                         "use rep_randomized")
    if support is not None:
        subsets = [_check_support(support, p)]
    else:
        k = _subset_size(p, s, strict)
        subsets = itertools.combinations(range(p), k)
    best = (np.inf, None, None)
    for J in subsets:  # lexicographic, strict improvement keeps the first minimizer
        r, v = _best_for_J(M, J, p, best[0])
        if v is not None and r < best[0]:
            best = (r, tuple(J), v)
    r, J, v = best
    if v is None:  # pragma: no cover - e_j is always feasible
        raise RuntimeError("no feasible direction found")
    return RepEstimate(max(cone_ratio(M, v, J), 0.0), int(s), "exact", J, v, strict)


def _project_cone(V, mask):
    """Rowwise Euclidean projection onto {||y||_1 <= 3 sig'x}, x = v_J, y = v_Jc, sig = sign(x).

    Inside the orthant of x the cone is convex and the projection is
    x + 3 mu sig, soft(y, mu), with mu the root of a piecewise linear equation.
    """
    X = np.where(mask, V, 0.0)
    Y = np.where(mask, 0.0, V)
    sig = np.sign(X)
    k = np.abs(sig).sum(axis=1)
    T = CONE * np.abs(X).sum(axis=1)
    U = -np.sort(-np.abs(Y), axis=1)
    m = np.arange(1, V.shape[1] + 1)
    mu_m = (np.cumsum(U, axis=1) - T[:, None]) / (m + CONE * CONE * k[:, None])
    cond = U > mu_m
    last = V.shape[1] - 1 - np.argmax(cond[:, ::-1], axis=1)
    mu = np.where(cond.any(axis=1), mu_m[np.arange(V.shape[0]), last], 0.0)
    mu = np.maximum(mu, 0.0)[:, None]
    return np.where(mask, X + CONE * mu * sig, np.sign(Y) * np.maximum(np.abs(Y) - mu, 0.0))


def _top_mask(V, k):
    idx = np.argsort(-np.abs(V), axis=1, kind="stable")[:, :k]
    mask = np.zeros(V.shape, dtype=bool)
    np.put_along_axis(mask, idx, True, axis=1)
    return mask


def _retract(V, mask):
    V = _project_cone(V, mask)
    inner = np.where(mask, V, 0.0)
    return V / np.sqrt((inner * inner).sum(axis=1))[:, None]


def _ratios(M, V, mask, MV=None):
    if MV is None:
        MV = V @ M
    num = (MV * V).sum(axis=1)
    den = (np.where(mask, V, 0.0) ** 2).sum(axis=1)
    return num / den


def _refine(M, V, mask, fixed, k, steps, step):
    best = _ratios(M, V, mask)
    best_V, best_mask = V.copy(), mask.copy()
    for _ in range(steps):
        MV = V @ M
        f = _ratios(M, V, mask, MV)
        G = 2.0 * (MV - f[:, None] * np.where(mask, V, 0.0))
        V = V - step * G
        if not fixed:
            mask = _top_mask(V, k)
        V = _retract(V, mask)
        f = _ratios(M, V, mask)
        better = f < best
        best = np.where(better, f, best)
        best_V[better] = V[better]
        best_mask[better] = mask[better]
    return best, best_V, best_mask


def rep_randomized(M, s: int, budget: int = 1000, seed: int = 0, strict: bool = True,
                   support=None, steps: int = 200, chunk: int = 256) -> RepEstimate:
    """Upper bound on kappa: best of ``budget`` random cone directions after projected gradient.

    Without ``support``, J follows the iterate: for a fixed v the best J is
    the set of its k largest entries.  Start ``i`` is drawn from
    ``stream(seed, i // chunk)``, so a larger budget only adds starts and the
    estimate is a running minimum.
    """
    M = _validate(M, s)
    p = M.shape[0]
    if int(budget) != budget or budget < 1000:
        raise ValueError("budget must be an integer >= 1000")
    fixed = support is not None
    if fixed:
        J0 = _check_support(support, p)
        k = len(J0)
    else:
        k = _subset_size(p, s, strict)
    lam_max = max(float(np.linalg.eigvalsh(M)[-1]), 1e-12)
    step = 0.5 / lam_max

    best = (np.inf, None, None)
    done = 0
    c = 0
    while done < budget:
        rng = stream(seed, c)
        if fixed:
            mask = np.zeros((chunk, p), dtype=bool)
            mask[:, list(J0)] = True
        else:
            mask = _top_mask(rng.random((chunk, p)), k)
        V = rng.standard_normal((chunk, p))
        frac = rng.random(chunk)
        inner = np.where(mask, V, 0.0)
        outer = np.where(mask, 0.0, V)
        l1 = np.abs(outer).sum(axis=1)
        l1[l1 == 0] = 1.0
        outer *= (frac * CONE * np.abs(inner).sum(axis=1) / l1)[:, None]
        V = _retract(inner + outer, mask)
        if not fixed:
            mask = _top_mask(V, k)
        take = min(chunk, budget - done)
        # refine the whole chunk so each start is independent of the budget
        f, V, mask = _refine(M, V, mask, fixed, k, steps, step)
        i = int(np.argmin(f[:take]))
        if f[i] < best[0]:
            J = tuple(int(j) for j in np.flatnonzero(mask[i]))
            best = (float(f[i]), J, V[i].copy())
        done += take
        c += 1
    _, J, v = best
    v = _polish(_normalize(v, J), J)
    return RepEstimate(max(cone_ratio(M, v, J), 0.0), int(s), "randomized", J, v, strict)
