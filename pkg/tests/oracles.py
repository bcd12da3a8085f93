"""Independent reference computations used by several test modules."""
import itertools
import math
from fractions import Fraction

import numpy as np


def brute_force_lasso(H, b, lam):
    """min 0.5 u'Hu + b'u + lam ||u||_1 by enumerating all 3^p sign patterns.

    For each pattern the smooth problem restricted to the active set is
    solved exactly; only sign-consistent solutions are kept.
    """
    p = len(b)
    best = (0.0, np.zeros(p))  # u = 0 is always a candidate
    for pattern in itertools.product((-1, 0, 1), repeat=p):
        act = [j for j in range(p) if pattern[j] != 0]
        if not act:
            continue
        s = np.array([pattern[j] for j in act], dtype=float)
        HA = H[np.ix_(act, act)]
        try:
            x = np.linalg.solve(HA, -(b[act] + lam * s))
        except np.linalg.LinAlgError:
            continue
        if np.any(np.sign(x) != s):
            continue
        u = np.zeros(p)
        u[act] = x
        val = 0.5 * u @ H @ u + b @ u + lam * np.abs(u).sum()
        if val < best[0]:
            best = (val, u)
    return best


def quad_double_loop(M, v):
    total = 0.0
    for j in range(len(v)):
        for k in range(len(v)):
            total += v[j] * M[j][k] * v[k]
    return total / 2


def catalan_fraction(m):
    return Fraction(math.factorial(2 * m - 2), m * math.factorial(m - 1) ** 2)


def random_psd(rng, p, extra=2):
    A = rng.standard_normal((p + extra, p))
    return A.T @ A / (p + extra)
