"""Cyclic coordinate descent for ``r_n(u) + lam * ||u||_1``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .quadform import QuadraticObjective

__all__ = [
    "SolverOptions",
    "LassoSolution",
    "soft_threshold",
    "kkt_residual",
    "solve",
    "solve_path",
]


def soft_threshold(x, t):
    """sign(x) * max(|x| - t, 0)."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("threshold must be nonnegative")
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


@dataclass(frozen=True)
class SolverOptions:
    max_iterations: int | None = None  # sweeps; None means 100 * p
    tol: float = 1e-9  # on the largest coordinate change in a sweep
    kkt_tol: float = 1e-7
    record_objective: bool = False


@dataclass
class LassoSolution:
    theta: np.ndarray  # caller coordinates
    theta_scaled: np.ndarray
    lam: float
    objective_value: float
    kkt_residual: float
    iterations: int
    converged: bool
    history: np.ndarray | None = None

    @property
    def support(self):
        return np.flatnonzero(self.theta_scaled != 0)


@njit(cache=True)
def _cd_sweeps(gram, linear, lam, u, grad, max_sweeps, tol):
    # u and grad are updated in place; grad must equal gram @ u + linear on entry
    p = u.shape[0]
    biggest = 0.0
    for sweep in range(max_sweeps):
        biggest = 0.0
        for j in range(p):
            h = gram[j, j]
            z = u[j] - grad[j] / h
            t = lam / h
            if z > t:
                new = z - t
            elif z < -t:
                new = z + t
            else:
                new = 0.0
            d = new - u[j]
            if d != 0.0:
                for k in range(p):
                    grad[k] += d * gram[k, j]
                u[j] = new
                if abs(d) > biggest:
                    biggest = abs(d)
        if biggest < tol:
            return sweep + 1, biggest
    return max_sweeps, biggest


def kkt_residual(obj: QuadraticObjective, u, lam: float) -> float:
    """Largest subgradient violation at scaled point ``u``.

    The gradient is recomputed from scratch so the certificate does not
    share state with the descent loop.
    """
    u = np.asarray(u, dtype=float)
    grad = obj.gram @ u + obj.linear
    active = u != 0
    viol = np.where(
        active,
        np.abs(grad + lam * np.sign(u)),
        np.maximum(np.abs(grad) - lam, 0.0),
    )
    return float(viol.max()) if viol.size else 0.0


def _check_inputs(obj, lam):
    if not np.isfinite(lam) or lam < 0:
        raise ValueError(f"lambda must be a finite nonnegative number, got {lam}")
    if not (np.all(np.isfinite(obj.gram)) and np.all(np.isfinite(obj.linear))):
        raise ValueError("objective contains NaN or inf")


def solve(obj: QuadraticObjective, lam: float, opts: SolverOptions | None = None,
          start=None) -> LassoSolution:
    """Minimize ``r_n + lam ||.||_1``; ``start`` is a warm start in scaled coordinates.

    Non-convergence returns the last iterate with ``converged=False``.
    """
    opts = opts or SolverOptions()
    lam = float(lam)
    _check_inputs(obj, lam)
    p = obj.p
    max_sweeps = opts.max_iterations if opts.max_iterations is not None else 100 * p
    gram = np.ascontiguousarray(obj.gram)
    linear = np.ascontiguousarray(obj.linear)
    u = np.zeros(p) if start is None else np.array(start, dtype=float)
    if u.shape != (p,) or not np.all(np.isfinite(u)):
        raise ValueError("warm start has wrong shape or non-finite entries")
    grad = gram @ u + linear

    history = [obj.penalized(u, lam)] if opts.record_objective else None
    done = 0
    tol = opts.tol
    converged = False
    while done < max_sweeps:
        if opts.record_objective:
            k, biggest = _cd_sweeps(gram, linear, lam, u, grad, 1, tol)
            history.append(obj.penalized(u, lam))
        else:
            k, biggest = _cd_sweeps(gram, linear, lam, u, grad, max_sweeps - done, tol)
        done += k
        if biggest < tol:
            kkt = kkt_residual(obj, u, lam)
            if kkt <= opts.kkt_tol and biggest < opts.tol:
                converged = True
                break
            # flat direction: updates are tiny but not yet optimal
            tol = tol * 1e-2 if tol > 1e-300 else 0.0
            grad = gram @ u + linear

    if not converged:
        kkt = kkt_residual(obj, u, lam)
    return LassoSolution(
        theta=obj.to_original(u),
        theta_scaled=u.copy(),
        lam=lam,
        objective_value=obj.penalized(u, lam),
        kkt_residual=kkt,
        iterations=done,
        converged=converged,
        history=np.array(history) if history is not None else None,
    )


def solve_path(obj: QuadraticObjective, lambdas, opts: SolverOptions | None = None):
    """Warm-started solutions along a strictly decreasing lambda sequence."""
    lambdas = np.asarray(lambdas, dtype=float).ravel()
    if lambdas.size == 0:
        return []
    if np.any(np.diff(lambdas) >= 0):
        raise ValueError("lambdas must be strictly decreasing")
    out = []
    start = None
    for lam in lambdas:
        sol = solve(obj, lam, opts, start=start)
        out.append(sol)
        start = sol.theta_scaled
    return out
