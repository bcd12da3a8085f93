"""Theoretical regularization levels and the oracle-bound right-hand sides."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .dependence import (
    DeviationProfile,
    MZParams,
    _catalan_exact,
    exponential_profile,
    gaussian_profile,
    hoeffding_profile,
    mz_tail_psi,
)

__all__ = [
    "CalibrationResult",
    "lambda_star_generic",
    "lambda_iid_regression",
    "lambda_mz_regression",
    "lambda_exp_regression",
    "lambda_density",
    "lambda_density_iid",
    "oracle_bounds",
    "exp_regression_constant",
    "density_constant",
]


@dataclass
class CalibrationResult:
    lambda_star: float
    constant: float | None = None  # script-C of the closed form, when there is one
    risk_bound: float | None = None
    l1_bound: float | None = None
    validity: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return all(self.validity.values())

    def as_dict(self) -> dict:
        out = {"lambda_star": self.lambda_star}
        if self.constant is not None:
            out["constant"] = self.constant
        if self.risk_bound is not None:
            out["risk_bound"] = self.risk_bound
            out["l1_bound"] = self.l1_bound
        out.update({f"valid_{k}": v for k, v in self.validity.items()})
        out.update(self.details)
        return out


def _check_common(n, p, epsilon):
    if n < 1 or p < 1:
        raise ValueError("n and p must be positive")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")


def lambda_star_generic(profile: DeviationProfile, n: int, p: int, epsilon: float) -> float:
    """lambda* = 4 n^{alpha - 1/2} psi^{-1}(epsilon / p)."""
    _check_common(n, p, epsilon)
    y = epsilon / p
    try:
        inv = profile.psi_inverse(y)
    except ValueError:
        raise ValueError(f"epsilon/p = {y:g} lies outside the range of psi") from None
    return 4.0 * n ** (profile.alpha - 0.5) * inv


def lambda_iid_regression(sigma: float, n: int, p: int, epsilon: float) -> float:
    """4 sigma sqrt(2 log(p / epsilon) / n) for iid subGaussian noise."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    _check_common(n, p, epsilon)
    return 4.0 * sigma * math.sqrt(2.0 * math.log(p / epsilon) / n)


def lambda_mz_regression(C, q, maxX, n, p, epsilon, full_factorial=False) -> float:
    """4 C^{1/2} max(X)^q / sqrt(n) * (d_{2q} q! p / epsilon)^{1/(2q)}.

    ``full_factorial`` replaces q! by (2q)!, which is what Markov's inequality
    on the moment bound C^q d_{2q} (2q)! n^q yields; the default keeps the
    closed form's q!.
    """
    if C < 1:
        raise ValueError("C must be >= 1")
    if int(q) != q or q < 1:
        raise ValueError("q must be a positive integer")
    if maxX <= 0:
        raise ValueError("max(X) must be positive")
    _check_common(n, p, epsilon)
    q = int(q)
    fact = math.factorial(2 * q) if full_factorial else math.factorial(q)
    try:
        inner = float(_catalan_exact(2 * q) * fact) * p / epsilon
    except OverflowError:
        raise OverflowError(f"d_{2 * q} q! overflows a double for q={q}") from None
    return 4.0 * math.sqrt(C) * maxX**q / math.sqrt(n) * inner ** (1.0 / (2 * q))


def _restriction(constant, c, mu, n, p, epsilon):
    log_rhs = math.log(epsilon / 2) + c * c * n ** (1.0 / (mu + 2)) / constant
    p_max = math.exp(log_rhs) if log_rhs < 709 else math.inf
    return {"p_restriction": math.log(p) <= log_rhs}, {"p_max": p_max}


def exp_regression_constant(K, M_bound, L1, L2, mu, maxX, psi11, c) -> float:
    c1 = 4.0 * K**2 * maxX**2 * psi11 * L1
    c2 = 2.0 * L2 * maxX * max(K, M_bound) * max(2 ** (mu + 3) / psi11, 1.0)
    return c1 + c * c2


def _attach_bounds(result, s, kappa):
    if s is not None and kappa is not None:
        result.risk_bound, result.l1_bound = oracle_bounds(result.lambda_star, s, kappa)
    return result


def lambda_exp_regression(K, M_bound, L1, L2, mu, maxX, psi11, c, n, p, epsilon,
                          s=None, kappa=None) -> CalibrationResult:
    """Closed-form lambda for regression with noise obeying an exponential inequality.

    lambda = 4 sqrt(C log(2p/eps) / n) with
    C = 4 K^2 max(X)^2 Psi(1,1) L1 + c 2 L2 max(X) (K v M) (2^{mu+3}/Psi(1,1) v 1).
    The side condition p <= (eps/2) exp(c^2 n^{1/(mu+2)} / C) is reported, not enforced.
    """
    for name, val in dict(K=K, M_bound=M_bound, L1=L1, L2=L2, maxX=maxX, psi11=psi11, c=c).items():
        if not val > 0:
            raise ValueError(f"{name} must be positive")
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    _check_common(n, p, epsilon)
    const = exp_regression_constant(K, M_bound, L1, L2, mu, maxX, psi11, c)
    lam = 4.0 * math.sqrt(const * math.log(2 * p / epsilon) / n)
    validity, details = _restriction(const, c, mu, n, p, epsilon)
    result = CalibrationResult(lam, const, validity=validity, details=details)
    return _attach_bounds(result, s, kappa)


def density_constant(B, L, L1, mu, c) -> float:
    return 4.0 * B * L * L1 + (2 ** (3 + mu) * B * L1) ** (1.0 / (mu + 2)) * c


def lambda_density(B, L, L1, L2, mu, c, n, p, epsilon, s=None, kappa=None) -> CalibrationResult:
    """Closed-form lambda for density estimation under an exponential inequality.

    C = 4 B L L1 + (2^{3+mu} B L1)^{1/(mu+2)} c; L2 does not enter C and is
    only carried into ``details``.
    """
    if B < 1:
        raise ValueError("B must be >= 1")
    if L <= 0 or L1 <= 0:
        raise ValueError("L and L1 must be positive")
    if c < 0 or mu < 0:
        raise ValueError("c and mu must be nonnegative")
    _check_common(n, p, epsilon)
    const = density_constant(B, L, L1, mu, c)
    lam = 4.0 * math.sqrt(const * math.log(2 * p / epsilon) / n)
    validity, details = _restriction(const, c, mu, n, p, epsilon)
    details["L2"] = L2
    result = CalibrationResult(lam, const, validity=validity, details=details)
    return _attach_bounds(result, s, kappa)


def lambda_density_iid(B, n, p, epsilon) -> float:
    """4 B sqrt(2 log(2p / epsilon) / n) for iid samples and |phi_j| <= B."""
    if B <= 0:
        raise ValueError("B must be positive")
    _check_common(n, p, epsilon)
    return 4.0 * B * math.sqrt(2.0 * math.log(2 * p / epsilon) / n)


def oracle_bounds(lam: float, s: int, kappa: float):
    """(4 lam^2 s / kappa, 2 lam s / kappa): risk-gap and l1-error bounds."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if lam <= 0 or s < 1:
        raise ValueError("need lam > 0 and s >= 1")
    return 4.0 * lam * lam * s / kappa, 2.0 * lam * s / kappa


# profiles matching each closed form, for composing with lambda_star_generic

def iid_regression_profile(sigma: float) -> DeviationProfile:
    return gaussian_profile(sigma)


def exp_regression_profile(K, M_bound, L1, L2, mu, maxX, psi11, c) -> DeviationProfile:
    return exponential_profile(exp_regression_constant(K, M_bound, L1, L2, mu, maxX, psi11, c))


def density_profile(B, L, L1, mu, c) -> DeviationProfile:
    return exponential_profile(density_constant(B, L, L1, mu, c))


def mz_regression_profile(C, q, maxX) -> DeviationProfile:
    """Moment profile of the scores X_ij eps_i: c_{W,2q} <= max(X)^{2q} c_{eps,2q}."""
    return mz_tail_psi(MZParams(C * maxX ** (2 * q), q))


def iid_density_profile(B) -> DeviationProfile:
    return hoeffding_profile(B)


def smallest_valid_c(K, M_bound, L1, L2, mu, maxX, psi11, n, p, epsilon) -> float:
    """Smallest c > 0 meeting p <= (eps/2) exp(c^2 n^{1/(mu+2)} / C(c)).

    With C(c) = C1 + c C2 the condition is the quadratic
    a c^2 - g C2 c - g C1 >= 0, g = log(2p/eps), a = n^{1/(mu+2)}.
    """
    _check_common(n, p, epsilon)
    c1 = exp_regression_constant(K, M_bound, L1, L2, mu, maxX, psi11, 0.0)
    c2 = exp_regression_constant(K, M_bound, L1, L2, mu, maxX, psi11, 1.0) - c1
    g = math.log(2 * p / epsilon)
    a = n ** (1.0 / (mu + 2))
    return (g * c2 + math.sqrt((g * c2) ** 2 + 4 * a * g * c1)) / (2 * a)
