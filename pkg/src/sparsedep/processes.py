"""Seeded generators for designs and (dependent) noise processes.

All generators are pure functions of their spec and seed.  Random streams
come from :func:`stream`, a Philox generator keyed by ``(seed, *keys)``;
replication ``r`` of an experiment uses ``stream(seed, r, ...)``.
"""
from __future__ import annotations

import csv
from dataclasses import asdict, dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.linalg import cholesky, toeplitz

__all__ = [
    "ProcessSpec",
    "DesignSpec",
    "stream",
    "generate",
    "generate_iid",
    "generate_ar1",
    "generate_long_memory_gaussian",
    "hermite2_transform",
    "generate_design",
    "fgn_autocovariance",
    "implied_decay_constant",
    "write_series_csv",
]

KINDS = ("iid_gaussian", "ar1", "long_memory_gaussian", "hermite2_of_long_memory")
MAX_CHOLESKY_N = 4096


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Independent, reproducible generator for the sub-stream ``keys`` of ``seed``."""
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


def _rng(seed_or_rng, *keys):
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return stream(seed_or_rng, *keys)


@dataclass(frozen=True)
class ProcessSpec:
    kind: str
    n: int
    seed: int = 0
    sigma: float = 1.0
    vartheta: float = 0.0
    beta: float = 0.5
    clip: float | None = None  # optional symmetric truncation, keeps the process bounded

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown process kind {self.kind!r}; expected one of {KINDS}")
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if not -1 < self.vartheta < 1:
            raise ValueError(f"vartheta must lie in (-1, 1), got {self.vartheta}")
        if self.kind in KINDS[2:] and not 0 < self.beta < 1:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if self.clip is not None and self.clip <= 0:
            raise ValueError("clip level must be positive")

    def label(self) -> str:
        extra = {
            "iid_gaussian": f"sigma={self.sigma:g}",
            "ar1": f"vartheta={self.vartheta:g}",
            "long_memory_gaussian": f"beta={self.beta:g}",
            "hermite2_of_long_memory": f"beta={self.beta:g}",
        }[self.kind]
        clip = f",clip={self.clip:g}" if self.clip is not None else ""
        return f"{self.kind}({extra}{clip})"


@dataclass(frozen=True)
class DesignSpec:
    n: int
    p: int
    rho: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ValueError("n and p must be positive")
        if not -1 < self.rho < 1:
            raise ValueError(f"rho must lie in (-1, 1), got {self.rho}")

    def covariance(self):
        idx = np.arange(self.p)
        return self.rho ** np.abs(np.subtract.outer(idx, idx))


def generate_iid(spec: ProcessSpec, paths=None, rng=None):
    rng = _rng(spec.seed if rng is None else rng)
    shape = (spec.n,) if paths is None else (paths, spec.n)
    return _clip(spec, spec.sigma * rng.standard_normal(shape))


def generate_ar1(spec: ProcessSpec, paths=None, rng=None):
    """eps_1 ~ N(0,1), eps_i = vartheta eps_{i-1} + eta_i, eta_i ~ N(0, 1 - vartheta^2).

    Draws the same standard normals as :func:`generate_iid`, so
    ``vartheta = 0`` reproduces the iid path exactly.
    """
    if not -1 < spec.vartheta < 1:
        raise ValueError("|vartheta| must be < 1")
    rng = _rng(spec.seed if rng is None else rng)
    shape = (spec.n,) if paths is None else (paths, spec.n)
    z = rng.standard_normal(shape)
    vt = spec.vartheta
    if vt == 0.0:
        return _clip(spec, z)
    innov = np.sqrt(1.0 - vt * vt)
    eps = np.empty_like(z)
    eps[..., 0] = z[..., 0]
    for i in range(1, spec.n):
        eps[..., i] = vt * eps[..., i - 1] + innov * z[..., i]
    return _clip(spec, eps)


def fgn_autocovariance(lags, hurst: float):
    """gamma(k) = 0.5 (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H})."""
    k = np.abs(np.asarray(lags, dtype=float))
    h2 = 2.0 * hurst
    return 0.5 * (np.abs(k + 1) ** h2 - 2 * k**h2 + np.abs(k - 1) ** h2)


def hurst_from_beta(beta: float) -> float:
    return 1.0 - beta / 2.0


def implied_decay_constant(beta: float) -> float:
    """B in gamma(k) ~ B k^{-beta} for fractional Gaussian noise with H = 1 - beta/2."""
    h = hurst_from_beta(beta)
    return h * (2 * h - 1)


@lru_cache(maxsize=16)
def _fgn_factor(n: int, beta: float):
    if n > MAX_CHOLESKY_N:
        raise ValueError(f"n={n} exceeds the Cholesky synthesis limit {MAX_CHOLESKY_N}")
    cov = toeplitz(fgn_autocovariance(np.arange(n), hurst_from_beta(beta)))
    factor = cholesky(cov, lower=True)
    factor.setflags(write=False)
    return factor


def generate_long_memory_gaussian(spec: ProcessSpec, paths=None, rng=None):
    """Unit-variance fractional Gaussian noise with autocovariance ~ B i^{-beta}.

    Exact synthesis through the Cholesky factor of the n x n covariance.
    """
    if not 0 < spec.beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    rng = _rng(spec.seed if rng is None else rng)
    factor = _fgn_factor(spec.n, float(spec.beta))
    shape = (spec.n,) if paths is None else (paths, spec.n)
    z = rng.standard_normal(shape)
    return _clip(spec, z @ factor.T)


def hermite2_transform(g):
    """V_i = G_i^2 - 1, the second Hermite polynomial."""
    g = np.asarray(g, dtype=float)
    return g * g - 1.0


def _clip(spec, x):
    if spec.clip is None:
        return x
    return np.clip(x, -spec.clip, spec.clip)


def generate(spec: ProcessSpec, paths=None, rng=None):
    """Dispatch on ``spec.kind``; ``paths`` adds a leading replication axis."""
    if spec.kind == "iid_gaussian":
        return generate_iid(spec, paths, rng)
    if spec.kind == "ar1":
        return generate_ar1(spec, paths, rng)
    if spec.kind == "long_memory_gaussian":
        return generate_long_memory_gaussian(spec, paths, rng)
    base = ProcessSpec("long_memory_gaussian", spec.n, spec.seed, beta=spec.beta)
    return _clip(spec, hermite2_transform(generate_long_memory_gaussian(base, paths, rng)))


@lru_cache(maxsize=16)
def _design_factor(p: int, rho: float):
    cov = DesignSpec(1, p, rho).covariance()
    try:
        factor = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - impossible for |rho| < 1
        raise AssertionError(f"Toeplitz covariance with rho={rho} not positive definite") from exc
    factor.setflags(write=False)
    return factor


def generate_design(spec: DesignSpec, rng=None):
    """n x p matrix with iid rows N_p(0, Sigma), Sigma_ij = rho^{|i-j|}."""
    rng = _rng(spec.seed if rng is None else rng)
    z = rng.standard_normal((spec.n, spec.p))
    return z @ _design_factor(spec.p, float(spec.rho)).T


def write_series_csv(path, series: dict, header_note: str | None = None):
    """Write equal-length series as columns; the header names each column."""
    path = Path(path)
    cols = {k: np.asarray(v, dtype=float).ravel() for k, v in series.items()}
    lengths = {c.size for c in cols.values()}
    if len(lengths) != 1:
        raise ValueError("all series must have the same length")
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header_note:
            fh.write(f"# {header_note}\n")
        w.writerow(list(cols))
        for row in zip(*cols.values()):
            w.writerow([format(x, ".17g") for x in row])
    return path


def spec_dict(spec) -> dict:
    return asdict(spec)
