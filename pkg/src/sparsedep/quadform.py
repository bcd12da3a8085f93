"""Empirical quadratic risk in canonical form.

Every problem handled by the package reduces to

    r_n(theta) = 0.5 * theta' H theta + b' theta + c

where ``H`` is the (non-random) Hessian of the empirical risk.  The solver
works on a column-rescaled copy of the problem whose Hessian has unit
diagonal; ``column_scale`` maps those coordinates back to the caller's.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "QuadraticObjective",
    "RegressionData",
    "build_regression_objective",
    "evaluate_risk_gap",
    "read_regression_csv",
]


@dataclass(frozen=True)
class QuadraticObjective:
    """Canonical quadratic risk in scaled coordinates.

    With ``D = diag(column_scale)`` and caller coordinates ``theta = D u``,

        r_n = 0.5 * u' gram u + linear' u + constant.

    ``gram`` is the unit-diagonal Hessian (the matrix M of the theory) and
    ``linear`` the gradient at zero, both already expressed in ``u``.
    """

    gram: np.ndarray
    linear: np.ndarray
    constant: float
    column_scale: np.ndarray
    n: int = 1
    # raw data kept for direct re-evaluation in tests; never used by the solver
    source: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        for name in ("gram", "linear", "column_scale"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        p = self.linear.shape[0]
        if self.gram.shape != (p, p) or self.column_scale.shape != (p,):
            raise ValueError("inconsistent objective dimensions")
        if not np.allclose(self.gram, self.gram.T, rtol=0, atol=1e-12):
            raise ValueError("gram matrix is not symmetric")
        if np.any(self.column_scale <= 0):
            raise ValueError("column scales must be positive")

    @classmethod
    def from_hessian(cls, hessian, linear, constant=0.0, n=1, source=None):
        """Normalize ``0.5 t'Ht + b't + c`` (caller coordinates) to unit diagonal."""
        hessian = np.asarray(hessian, dtype=float)
        linear = np.asarray(linear, dtype=float)
        if not (np.all(np.isfinite(hessian)) and np.all(np.isfinite(linear))):
            raise ValueError("non-finite entries in quadratic form")
        diag = np.diag(hessian)
        bad = np.flatnonzero(diag <= 0)
        if bad.size:
            raise ValueError(f"Hessian diagonal vanishes at column {int(bad[0])}")
        scale = 1.0 / np.sqrt(diag)
        gram = hessian * np.outer(scale, scale)
        gram = 0.5 * (gram + gram.T)
        np.fill_diagonal(gram, 1.0)
        return cls(gram, linear * scale, float(constant), scale, int(n), source or {})

    @property
    def p(self) -> int:
        return self.linear.shape[0]

    def to_scaled(self, theta):
        return np.asarray(theta, dtype=float) / self.column_scale

    def to_original(self, u):
        return np.asarray(u, dtype=float) * self.column_scale

    def risk(self, u):
        """r_n at scaled coordinates ``u``."""
        u = np.asarray(u, dtype=float)
        return float(0.5 * u @ self.gram @ u + self.linear @ u + self.constant)

    def gradient(self, u):
        return self.gram @ np.asarray(u, dtype=float) + self.linear

    def penalized(self, u, lam):
        """r_n(u) + lam * ||u||_1, the quantity minimized by the solver."""
        return self.risk(u) + lam * float(np.abs(u).sum())

    def risk_original(self, theta):
        return self.risk(self.to_scaled(theta))

    @property
    def hessian_original(self):
        """Hessian in caller coordinates, ``D^{-1} M D^{-1}``."""
        inv = 1.0 / self.column_scale
        return self.gram * np.outer(inv, inv)

    @property
    def lambda_max(self) -> float:
        """Smallest lambda for which zero is a solution."""
        return float(np.max(np.abs(self.linear)))


@dataclass(frozen=True)
class RegressionData:
    """Fixed design ``X`` (n x p) and response ``Y`` (n)."""

    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        Y = np.asarray(self.Y, dtype=float).ravel()
        if X.shape[0] != Y.shape[0]:
            raise ValueError(f"X has {X.shape[0]} rows but Y has {Y.shape[0]} entries")
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError("need n >= 1 and p >= 1")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise ValueError("regression data contains NaN or inf")
        zero = np.flatnonzero(~np.any(X != 0, axis=0))
        if zero.size:
            raise ValueError(f"column {int(zero[0])} of X is identically zero")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.X)))


def build_regression_objective(data: RegressionData) -> QuadraticObjective:
    """Least-squares risk ``(1/n) sum (Y_i - X_i' theta)^2`` in canonical form.

    The Hessian is ``(2/n) X'X``; after normalization its diagonal is one, so
    the implied scaled design ``X * column_scale`` has ``(2/n) ||x_j||^2 = 1``.
    """
    if not isinstance(data, RegressionData):
        data = RegressionData(*data)
    X, Y, n = data.X, data.Y, data.n
    hessian = (2.0 / n) * (X.T @ X)
    linear = -(2.0 / n) * (X.T @ Y)
    constant = float(Y @ Y) / n
    return QuadraticObjective.from_hessian(hessian, linear, constant, n, {"X": X, "Y": Y})


def evaluate_risk_gap(obj: QuadraticObjective, theta_hat, theta_bar, scaled=False) -> float:
    """``v'(M/2)v`` with ``v = theta_hat - theta_bar``.

    Vectors are in caller coordinates unless ``scaled`` is set; the value is
    the same either way once coordinates are converted consistently.
    """
    theta_hat = np.asarray(theta_hat, dtype=float).ravel()
    theta_bar = np.asarray(theta_bar, dtype=float).ravel()
    if theta_hat.shape != (obj.p,) or theta_bar.shape != (obj.p,):
        raise ValueError(
            f"expected vectors of length {obj.p}, got {theta_hat.shape} and {theta_bar.shape}"
        )
    v = theta_hat - theta_bar
    if not scaled:
        v = obj.to_scaled(v)
    return float(0.5 * v @ obj.gram @ v)


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def read_regression_csv(path) -> RegressionData:
    """Load ``Y, X_1, ..., X_p`` rows; a non-numeric first row is a header."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(tok.strip() for tok in r)]
    if not rows:
        raise ValueError(f"{path}: empty file")
    if not all(_is_number(tok) for tok in rows[0]):
        rows = rows[1:]
    try:
        table = np.array([[float(tok) for tok in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric entry ({exc})") from None
    if table.ndim != 2 or table.shape[1] < 2:
        raise ValueError(f"{path}: need at least two columns (Y and one regressor)")
    return RegressionData(table[:, 1:], table[:, 0])
