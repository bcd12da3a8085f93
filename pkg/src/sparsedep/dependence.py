"""Deviation control for sums of weakly dependent variables.

Score variables W_i^(j), the moment-inequality constants (Catalan numbers
and the sharper recursive sequence), the Doukhan-Neumann exponential bound,
deviation profiles ``(alpha, psi)`` with explicit inverses, and a Monte Carlo
checker for the deviation condition.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import processes

__all__ = [
    "MZParams",
    "ExpIneqParams",
    "DeviationProfile",
    "DeviationReport",
    "scores_regression",
    "scores_density",
    "catalan_d",
    "a_sequence",
    "mz_moment_bound",
    "mz_tail_psi",
    "dn_tail_bound",
    "eta_to_dn_params",
    "gaussian_profile",
    "hoeffding_profile",
    "exponential_profile",
    "geometric_summability",
    "ar1_eta_constant",
    "clipped_ar1_mz_constant",
    "check_deviation_condition",
]

INT64_MAX = 2**63 - 1


# ---------------------------------------------------------------------------
# score variables

def scores_regression(X, eps):
    """W[i, j] = X[i, j] * eps[i]."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    eps = np.asarray(eps, dtype=float).ravel()
    if X.shape[0] != eps.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows, eps has {eps.shape[0]} entries")
    return X * eps[:, None]


def scores_density(samples, dictionary, true_means):
    """W[i, j] = E phi_j(Z_1) - phi_j(samples[i]).

    ``dictionary`` is anything with ``evaluate(x) -> (n, p)``, or a callable
    doing the same.
    """
    samples = np.asarray(samples, dtype=float).ravel()
    evaluate = dictionary.evaluate if hasattr(dictionary, "evaluate") else dictionary
    phi = np.atleast_2d(evaluate(samples))
    true_means = np.asarray(true_means, dtype=float).ravel()
    if phi.shape[1] != true_means.shape[0]:
        raise ValueError(f"dictionary has {phi.shape[1]} functions, got {true_means.shape[0]} means")
    return true_means[None, :] - phi


# ---------------------------------------------------------------------------
# moment inequality constants

def _catalan_exact(m: int) -> int:
    return math.factorial(2 * m - 2) // (m * math.factorial(m - 1) ** 2)


def catalan_d(m: int) -> int:
    """d_m = (2m-2)! / (m ((m-1)!)^2), the (m-1)-th Catalan number."""
    if int(m) != m or m < 2:
        raise ValueError(f"d_m is defined for integers m >= 2, got {m}")
    value = _catalan_exact(int(m))
    if value > INT64_MAX:
        raise OverflowError(f"d_{m} exceeds the 64-bit integer range")
    return value


def a_sequence(m_max: int) -> dict[int, int]:
    """a_2 = 1, a_3 = 2, a_m = m - 1 + sum_{k=2}^{m-2} a_k a_{m-k}; keys are m."""
    if int(m_max) != m_max or m_max < 2:
        raise ValueError("m_max must be an integer >= 2")
    a = {2: 1, 3: 2}
    for m in range(4, int(m_max) + 1):
        a[m] = m - 1 + sum(a[k] * a[m - k] for k in range(2, m - 1))
        if a[m] > INT64_MAX:
            raise OverflowError(f"a_{m} exceeds the 64-bit integer range")
    a = {m: v for m, v in a.items() if m <= m_max}
    for m, v in a.items():
        assert v <= _catalan_exact(m), f"a_{m}={v} exceeds d_{m}"
    return a


@dataclass(frozen=True)
class MZParams:
    """c_{V,2q}(r) <= C (r+1)^{-q} for all r >= 0."""

    C: float
    q: int

    def __post_init__(self):
        if self.C < 1:
            raise ValueError("the covariance constant C must be >= 1")
        if int(self.q) != self.q or self.q < 1:
            raise ValueError("q must be a positive integer")

    @property
    def tail_constant(self) -> float:
        """C^q d_{2q} (2q)! ; the 2q-th moment of S_n / sqrt(n) is at most this."""
        q = int(self.q)
        try:
            return float(self.C) ** q * float(_catalan_exact(2 * q) * math.factorial(2 * q))
        except OverflowError:
            return math.inf


def mz_moment_bound(params: MZParams, n: int) -> float:
    """E[(V_1 + ... + V_n)^{2q}] <= C^q d_{2q} (2q)! n^q; inf on overflow."""
    if n < 1:
        raise ValueError("n must be >= 1")
    try:
        return params.tail_constant * float(n) ** int(params.q)
    except OverflowError:
        return math.inf


# ---------------------------------------------------------------------------
# deviation profiles

FAMILIES = ("gaussian", "bounded_hoeffding", "exponential_DN", "polynomial_MZ")


@dataclass(frozen=True)
class DeviationProfile:
    """A pair (alpha, psi) with P(|mean W^(j)| >= n^{alpha - 1/2} t) <= psi(t).

    ``scale`` is the family's single constant: sigma, B, the exponential
    constant, or the polynomial constant C^q d_{2q} (2q)!; ``power`` is 2q
    for the polynomial family.
    """

    family: str
    scale: float
    alpha: float = 0.0
    power: int = 2
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if not 0 <= self.alpha <= 0.5:
            raise ValueError("alpha must lie in [0, 1/2]")
        if not self.scale > 0:
            raise ValueError("profile scale must be positive")

    def psi(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("psi is defined for t >= 0")
        s = self.scale
        with np.errstate(divide="ignore", over="ignore"):
            if self.family == "gaussian":
                out = np.exp(-(t**2) / (2 * s * s))
            elif self.family == "bounded_hoeffding":
                out = 2 * np.exp(-(t**2) / (2 * s * s))
            elif self.family == "exponential_DN":
                out = 2 * np.exp(-(t**2) / s)
            else:
                out = s / t**self.power
        out = np.minimum(out, 1.0)
        return float(out) if out.ndim == 0 else out

    def psi_inverse(self, y):
        y = np.asarray(y, dtype=float)
        if np.any((y <= 0) | (y >= 1)):
            raise ValueError("psi_inverse is defined on (0, 1)")
        s = self.scale
        if self.family == "gaussian":
            out = s * np.sqrt(2 * np.log(1 / y))
        elif self.family == "bounded_hoeffding":
            out = s * np.sqrt(2 * np.log(2 / y))
        elif self.family == "exponential_DN":
            out = np.sqrt(s * np.log(2 / y))
        else:
            out = (s / y) ** (1.0 / self.power)
        return float(out) if out.ndim == 0 else out

    @property
    def domain_start(self) -> float:
        """Smallest t with psi(t) < 1; psi_inverse inverts psi beyond it."""
        s = self.scale
        if self.family == "gaussian":
            return 0.0
        if self.family == "bounded_hoeffding":
            return s * math.sqrt(2 * math.log(2))
        if self.family == "exponential_DN":
            return math.sqrt(s * math.log(2))
        return s ** (1.0 / self.power)


def gaussian_profile(sigma: float = 1.0, alpha: float = 0.0) -> DeviationProfile:
    """psi(t) = exp(-t^2 / (2 sigma^2)), iid subGaussian noise."""
    return DeviationProfile("gaussian", float(sigma), alpha)


def hoeffding_profile(B: float) -> DeviationProfile:
    """psi(t) = 2 exp(-t^2 / (2 B^2)) for iid variables bounded by B."""
    return DeviationProfile("bounded_hoeffding", float(B))


def exponential_profile(constant: float, **meta) -> DeviationProfile:
    """psi(u) = 2 exp(-u^2 / constant), so psi^{-1}(y) = sqrt(constant log(2/y)).

    This is the form whose inverse yields the exponential-inequality
    corollaries' lambda = 4 sqrt(constant log(2p/eps) / n).
    """
    return DeviationProfile("exponential_DN", float(constant), meta=meta)


def mz_tail_psi(params: MZParams) -> DeviationProfile:
    """Markov's inequality on the 2q-th moment of S_n / sqrt(n).

    psi(t) = min(1, C^q d_{2q} (2q)! / t^{2q}), alpha = 0.
    """
    return DeviationProfile(
        "polynomial_MZ", params.tail_constant, 0.0, power=2 * int(params.q),
        meta={"C": params.C, "q": params.q},
    )


# ---------------------------------------------------------------------------
# exponential inequality

def psi_function(kind: str, u: int, v: int, alpha: float | None = None) -> float:
    """The combinatorial weight Psi(u, v) of the covariance condition."""
    if kind == "2v":
        return 2.0 * v
    if kind == "u+v":
        return float(u + v)
    if kind == "uv":
        return float(u * v)
    if kind == "mixed":
        if alpha is None or not 0 < alpha < 1:
            raise ValueError("mixed Psi needs alpha in (0, 1)")
        return alpha * (u + v) + (1 - alpha) * u * v
    raise ValueError(f"unknown Psi kind {kind!r}")


@dataclass(frozen=True)
class ExpIneqParams:
    """Constants of the Doukhan-Neumann covariance condition.

    |cov(prod V_s, prod V_t)| <= K^2 M^{u+v-2} Psi(u, v) rho(t_1 - s_u) with
    sum_s (s+1)^k rho(s) <= L1 L2^k (k!)^mu.  ``A_n`` defaults to the crude
    variance bound 2 n K^2 Psi(1,1) L1; ``B_n`` overrides the derived value.
    """

    K: float
    M_bound: float
    L1: float
    L2: float
    mu: float = 0.0
    psi_kind: str = "u+v"
    psi_alpha: float | None = None
    A_n: float | None = None
    B_n: float | None = None

    def __post_init__(self):
        for name in ("K", "M_bound", "L1", "L2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.mu < 0:
            raise ValueError("mu must be nonnegative")
        psi_function(self.psi_kind, 1, 1, self.psi_alpha)

    @property
    def psi11(self) -> float:
        return psi_function(self.psi_kind, 1, 1, self.psi_alpha)

    def variance_bound(self, n: int) -> float:
        return 2.0 * n * self.K**2 * self.psi11 * self.L1

    def a_n(self, n: int) -> float:
        a = self.variance_bound(n) if self.A_n is None else float(self.A_n)
        if not a > 0:
            raise ValueError("A_n must be positive")
        return a

    def b_n(self, n: int) -> float:
        if self.B_n is not None:
            return float(self.B_n)
        ratio = 2 ** (4 + self.mu) * n * self.K**2 * self.L1 / self.a_n(n)
        return 2.0 * max(self.K, self.M_bound) * self.L2 * max(ratio, 1.0)


def dn_tail_bound(params: ExpIneqParams, t, n: int):
    """exp(-(t^2/2) / (A_n + B_n^{1/(mu+2)} t^{(2mu+3)/(mu+2)})) bounding P(S_n >= t)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    a_n, b_n, mu = params.a_n(n), params.b_n(n), params.mu
    denom = a_n + b_n ** (1.0 / (mu + 2)) * t ** ((2 * mu + 3) / (mu + 2))
    out = np.exp(-(t**2 / 2) / denom)
    return float(out) if out.ndim == 0 else out


def eta_to_dn_params(eta_summability, M: float, A_n=None) -> ExpIneqParams:
    """eta-dependence implies the covariance condition with Psi = u+v, K^2 = M, rho = eta."""
    L1, L2, mu = eta_summability
    if M < 0:
        raise ValueError("the sup bound M must be nonnegative")
    return ExpIneqParams(K=math.sqrt(M), M_bound=M, L1=L1, L2=L2, mu=mu, psi_kind="u+v", A_n=A_n)


def geometric_summability(D: float, ratio: float):
    """(L1, L2, mu) with sum_s (s+1)^k D ratio^s <= L1 L2^k (k!)^mu for all k.

    With a = -log(ratio): the sum is at most D/ratio * k! a^{-k} (1 + 1/a),
    from bounding a unimodal series by its integral plus its peak.
    """
    ratio = abs(ratio)
    if not ratio < 1:
        raise ValueError("ratio must be < 1 in absolute value")
    if D <= 0:
        raise ValueError("D must be positive")
    if ratio == 0:
        return float(D), 1.0, 0.0
    a = -math.log(ratio)
    return D / ratio * (1 + 1 / a), 1 / a, 1.0


def ar1_eta_constant() -> float:
    """D in eta(r) = D |vartheta|^r for a unit-variance Gaussian AR(1) and its 1-Lipschitz images.

    Coupling the past with an independent copy gives |cov| <= Lip(g2) * E|eps - eps'| * |vartheta|^r
    for g1 bounded by one, and E|eps - eps'| = 2 / sqrt(pi).
    """
    return 2.0 / math.sqrt(math.pi)


def clipped_ar1_mz_constant(clip: float, vartheta: float, q: int) -> float:
    """C >= 1 with c_{V,2q}(r) <= C (r+1)^{-q} for V = clip(AR(1)).

    Uses c_{V,m}(r) <= m M^m eta(r) with M = clip and eta from :func:`ar1_eta_constant`.
    """
    D = ar1_eta_constant()
    m = 2 * q
    x = abs(vartheta)
    if x == 0:
        peak = 1.0
    else:
        a = -math.log(x)
        r = np.arange(0, int(math.ceil(10 * q / a)) + 10)
        peak = float(np.max((r + 1.0) ** q * x**r))
    return max(1.0, m * clip**m * D * peak)


# ---------------------------------------------------------------------------
# Monte Carlo check of the deviation condition

@dataclass
class DeviationReport:
    n: int
    reps: int
    alpha: float
    family: str
    t_grid: np.ndarray
    frequency: np.ndarray  # shape (len(t_grid), p)
    psi_t: np.ndarray  # shape (len(t_grid),)
    stderr: np.ndarray
    label: str = ""

    @property
    def violation(self):
        return self.frequency > self.psi_t[:, None] + 3 * self.stderr[:, None]

    @property
    def any_violation(self) -> bool:
        return bool(self.violation.any())

    def rows(self):
        viol = self.violation
        for jj in range(self.frequency.shape[1]):
            for k, t in enumerate(self.t_grid):
                yield jj, float(t), float(self.frequency[k, jj]), float(self.psi_t[k]), bool(viol[k, jj])

    def to_csv(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["j", "t", "frequency", "psi_t", "violation"])
            for j, t, f, s, v in self.rows():
                w.writerow([j, format(t, ".17g"), format(f, ".17g"), format(s, ".17g"), int(v)])
        return path

    def summary(self) -> str:
        lines = [
            f"deviation check: {self.label or 'scores'}",
            f"  n={self.n} reps={self.reps} profile={self.family} alpha={self.alpha:g}",
        ]
        for k, t in enumerate(self.t_grid):
            worst = float(self.frequency[k].max())
            flag = "VIOLATION" if self.violation[k].any() else "ok"
            lines.append(f"  t={t:g}: max freq={worst:.4f} psi={self.psi_t[k]:.4f} {flag}")
        lines.append(f"  result: {'FAIL' if self.any_violation else 'PASS'}")
        return "\n".join(lines)


def check_deviation_condition(source, profile: DeviationProfile, t_grid, n: int,
                              reps: int, seed: int = 0) -> DeviationReport:
    """Monte Carlo frequency of |n^{-1} sum_i W_i^(j)| >= n^{-1/2+alpha} t, per (t, j).

    ``source`` is a :class:`ProcessSpec` (the process itself is the single
    score column) or a callable ``rng -> (n,) or (n, p) array``.  Replication
    ``r`` draws from ``stream(seed, r)``.  A cell is flagged when its frequency
    exceeds psi(t) by more than three binomial standard errors.
    """
    if reps < 1000:
        raise ValueError("need at least 1000 replications")
    t_grid = np.asarray(t_grid, dtype=float).ravel()
    draw: Callable
    if isinstance(source, processes.ProcessSpec):
        spec = processes.ProcessSpec(**{**processes.spec_dict(source), "n": n})
        label = spec.label()

        def draw(rng):
            return processes.generate(spec, rng=rng)
    else:
        draw, label = source, getattr(source, "__name__", "scores")

    stats = []
    for r in range(reps):
        W = np.asarray(draw(processes.stream(seed, r)), dtype=float)
        if W.ndim == 1:
            W = W[:, None]
        if W.shape[0] != n:
            raise ValueError(f"score generator returned {W.shape[0]} rows, expected {n}")
        stats.append(np.abs(W.mean(axis=0)))
    stats = np.array(stats)  # (reps, p)
    thresholds = n ** (profile.alpha - 0.5) * t_grid
    freq = (stats[None, :, :] >= thresholds[:, None, None]).mean(axis=1)
    psi_t = np.atleast_1d(profile.psi(t_grid))
    stderr = np.sqrt(psi_t * (1 - psi_t) / reps)
    return DeviationReport(n, reps, profile.alpha, profile.family, t_grid, freq, psi_t, stderr, label)
