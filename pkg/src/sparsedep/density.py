"""Sparse density estimation over a dictionary of Gaussian bumps.

The risk is the L2 contrast  int f_theta^2 - (2/n) sum_i f_theta(Z_i),
with f_theta = sum_j theta_j phi_j.  Its Hessian is 2G with G the Gram
matrix of the dictionary in L2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .processes import stream, write_series_csv
from .quadform import QuadraticObjective

__all__ = [
    "Dictionary",
    "BumpMixture",
    "L2Error",
    "build_gaussian_bump_dictionary",
    "build_density_objective",
    "l2_error",
    "population_means",
    "quadrature_gram",
    "write_density_csv",
]

WINDOW_WIDTHS = 8.0
DEFAULT_NODES = 4001


@dataclass(frozen=True)
class Dictionary:
    centers: np.ndarray
    width: float
    B: float  # sup norm bound
    L: float  # Lipschitz constant
    gram: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("centers", "gram"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def p(self) -> int:
        return self.centers.size

    @property
    def window(self):
        pad = WINDOW_WIDTHS * self.width
        return float(self.centers.min() - pad), float(self.centers.max() + pad)

    def evaluate(self, x):
        """(len(x), p) matrix of phi_j(x_i)."""
        x = np.asarray(x, dtype=float).ravel()
        d = (x[:, None] - self.centers[None, :]) / self.width
        return np.exp(-0.5 * d * d)

    def density(self, theta, x):
        theta = np.asarray(theta, dtype=float).ravel()
        if theta.shape != (self.p,):
            raise ValueError(f"theta must have length {self.p}")
        return self.evaluate(x) @ theta


def build_gaussian_bump_dictionary(centers, width: float) -> Dictionary:
    """phi_j(x) = exp(-(x - c_j)^2 / (2 w^2)); B = 1, L = exp(-1/2) / w.

    G[j, k] = w sqrt(pi) exp(-(c_j - c_k)^2 / (4 w^2)).
    """
    if not width > 0:
        raise ValueError("width must be positive")
    centers = np.asarray(centers, dtype=float).ravel()
    if centers.size < 1 or not np.all(np.isfinite(centers)):
        raise ValueError("need at least one finite center")
    diff = np.subtract.outer(centers, centers)
    gram = width * math.sqrt(math.pi) * np.exp(-diff * diff / (4 * width * width))
    return Dictionary(centers, float(width), 1.0, math.exp(-0.5) / width, gram)


def quadrature_gram(dictionary: Dictionary, j: int, k: int) -> float:
    """int phi_j phi_k by adaptive quadrature, independent of the closed form."""
    w = dictionary.width
    cj, ck = dictionary.centers[j], dictionary.centers[k]

    def f(x):
        return math.exp(-((x - cj) ** 2 + (x - ck) ** 2) / (2 * w * w))

    mid, half = 0.5 * (cj + ck), 0.5 * abs(cj - ck) + 12 * w
    val, _ = integrate.quad(f, mid - half, mid + half, points=[cj, ck],
                            epsabs=1e-15, epsrel=1e-12, limit=200)
    return float(val)


def build_density_objective(dictionary: Dictionary, samples) -> QuadraticObjective:
    """Hessian 2G, linear term -(2/n) sum_i phi(Z_i), zero constant."""
    samples = np.asarray(samples, dtype=float).ravel()
    n = samples.size
    if n < 1:
        raise ValueError("need at least one sample")
    if not np.all(np.isfinite(samples)):
        raise ValueError("samples contain NaN or inf")
    linear = -(2.0 / n) * dictionary.evaluate(samples).sum(axis=0)
    return QuadraticObjective.from_hessian(
        2.0 * dictionary.gram, linear, 0.0, n, {"samples": samples}
    )


@dataclass(frozen=True)
class L2Error:
    value: float
    error_estimate: float  # change under halving the grid step


def _simpson(f, a, b, nodes):
    x = np.linspace(a, b, nodes)
    y = f(x)
    if not np.all(np.isfinite(y)):
        raise ValueError("integrand is not finite on the evaluation window")
    return float(integrate.simpson(y, x=x))


def l2_error(dictionary: Dictionary, theta_hat, reference, window=None,
             nodes: int = DEFAULT_NODES) -> L2Error:
    """int (f_theta_hat - reference)^2 over the window, composite Simpson.

    ``reference`` is a callable or a coefficient vector over the same
    dictionary.  The error estimate compares against half the nodes.
    """
    if nodes < 5 or nodes % 2 == 0:
        raise ValueError("nodes must be odd and >= 5")
    a, b = window or dictionary.window
    theta_hat = np.asarray(theta_hat, dtype=float)
    if callable(reference):
        ref = reference
    else:
        ref_theta = np.asarray(reference, dtype=float)

        def ref(x):
            return dictionary.density(ref_theta, x)

    def sq(x):
        d = dictionary.density(theta_hat, x) - np.asarray(ref(x), dtype=float)
        return d * d

    fine = _simpson(sq, a, b, nodes)
    coarse = _simpson(sq, a, b, (nodes + 1) // 2)
    return L2Error(fine, abs(fine - coarse))


def population_means(dictionary: Dictionary, density) -> np.ndarray:
    """E phi_j(Z) under ``density`` by adaptive quadrature."""
    a, b = dictionary.window
    out = np.empty(dictionary.p)
    for j, c in enumerate(dictionary.centers):
        def f(x, c=c):
            return math.exp(-0.5 * ((x - c) / dictionary.width) ** 2) * float(density(x))

        out[j] = integrate.quad(f, a, b, points=[c], epsabs=1e-13, epsrel=1e-11, limit=200)[0]
    return out


@dataclass(frozen=True)
class BumpMixture:
    """sum_k weight_k N(center_k, width^2), sitting inside a bump dictionary."""

    centers: tuple
    weights: tuple
    width: float

    def __post_init__(self):
        if len(self.centers) != len(self.weights) or not self.centers:
            raise ValueError("centers and weights must be nonempty and of equal length")
        if any(w <= 0 for w in self.weights) or not math.isclose(sum(self.weights), 1.0):
            raise ValueError("weights must be positive and sum to one")
        if not self.width > 0:
            raise ValueError("width must be positive")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        c = np.asarray(self.centers)
        wts = np.asarray(self.weights)
        d = (x[..., None] - c) / self.width
        return (np.exp(-0.5 * d * d) * wts).sum(axis=-1) / (self.width * math.sqrt(2 * math.pi))

    def theta(self, dictionary: Dictionary) -> np.ndarray:
        """Coefficients reproducing the mixture exactly in ``dictionary``."""
        if not math.isclose(dictionary.width, self.width):
            raise ValueError("mixture and dictionary widths differ")
        theta = np.zeros(dictionary.p)
        for c, wt in zip(self.centers, self.weights):
            hit = np.flatnonzero(np.isclose(dictionary.centers, c))
            if hit.size != 1:
                raise ValueError(f"center {c} is not a dictionary center")
            theta[hit[0]] = wt / (self.width * math.sqrt(2 * math.pi))
        return theta

    def sample(self, n: int, rng):
        labels = rng.choice(len(self.weights), size=n, p=np.asarray(self.weights))
        return np.asarray(self.centers)[labels] + self.width * rng.standard_normal(n)

    def sample_dependent(self, n: int, rng, vartheta: float = 0.5, stay: float = 0.5):
        """Dependent draws whose marginal is exactly the mixture.

        Labels follow a Markov chain that keeps its state with probability
        ``stay`` and otherwise redraws from the weights; the within-component
        offsets are a stationary unit AR(1) scaled by the width.  This
        sampling model is a simulation choice, not part of the estimator.
        """
        if not 0 <= stay < 1 or not -1 < vartheta < 1:
            raise ValueError("need 0 <= stay < 1 and |vartheta| < 1")
        wts = np.asarray(self.weights)
        labels = np.empty(n, dtype=int)
        labels[0] = rng.choice(wts.size, p=wts)
        keep = rng.random(n) < stay
        fresh = rng.choice(wts.size, size=n, p=wts)
        for i in range(1, n):
            labels[i] = labels[i - 1] if keep[i] else fresh[i]
        z = rng.standard_normal(n)
        g = np.empty(n)
        g[0] = z[0]
        innov = math.sqrt(1 - vartheta * vartheta)
        for i in range(1, n):
            g[i] = vartheta * g[i - 1] + innov * z[i]
        return np.asarray(self.centers)[labels] + self.width * g


def draw_samples(mixture: BumpMixture, n: int, seed: int, replication: int,
                 dependent: bool = False, vartheta: float = 0.5, stay: float = 0.5):
    rng = stream(seed, replication, 2)
    if dependent:
        return mixture.sample_dependent(n, rng, vartheta, stay)
    return mixture.sample(n, rng)


def write_density_csv(path, x, values):
    """Two-column (x, f(x)) export."""
    return write_series_csv(path, {"x": x, "f": values})
