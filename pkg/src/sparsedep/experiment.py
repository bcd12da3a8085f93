"""Simulation studies: the LASSO error curves, the oracle-inequality check,
sparse density estimation and Monte Carlo deviation checks.

Replication ``r`` draws its design from ``stream(seed, r, 0)`` and its noise
from ``stream(seed, r, 1)``, so results do not depend on execution order and
every noise setting sees the same underlying normals.
"""
from __future__ import annotations

import ast
import csv
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import calibration, dependence, density, processes
from .processes import DesignSpec, ProcessSpec, generate_design, stream
from .quadform import RegressionData, build_regression_objective, evaluate_risk_gap
from .repcheck import rep_exact, rep_randomized
from .solver import SolverOptions, solve, solve_path
from .svg import emit_svg

DEFAULT_THETA = (3.0, 1.5, 0.0, 0.0, 2.0)


def _theta_vector(theta, p):
    theta = np.asarray(theta, dtype=float).ravel()
    if theta.size > p:
        raise ValueError(f"theta_true has {theta.size} entries but p = {p}")
    out = np.zeros(p)
    out[: theta.size] = theta
    return out


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _write_rows(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
    return path


# ---------------------------------------------------------------------------
# configuration

@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 30
    p: int = 50
    theta_true: tuple = DEFAULT_THETA
    rho: float = 0.5
    varthetas: tuple = (-0.95, -0.5, 0.0, 0.5, 0.95)
    g_grid: tuple = tuple(np.linspace(0.02, 1.5, 30).tolist())
    replications: int = 25
    seed: int = 0
    epsilon: float = 0.1
    sigma: float = 1.0
    noise: str = "ar1"  # "ar1" or "iid"
    shared_design: bool = False  # one design for all replications
    standardize_response: bool = True  # lambda in units of the response RMS

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not self.g_grid or min(self.g_grid) <= 0:
            raise ValueError("g_grid values must be positive")
        if self.noise not in ("ar1", "iid"):
            raise ValueError("noise must be 'ar1' or 'iid'")
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        for vt in self.varthetas:
            if not -1 < vt < 1:
                raise ValueError(f"vartheta {vt} outside (-1, 1)")
        _theta_vector(self.theta_true, self.p)
        DesignSpec(self.n, self.p, self.rho)

    @property
    def theta(self):
        return _theta_vector(self.theta_true, self.p)


@dataclass(frozen=True)
class OracleCheckConfig:
    n: int = 100  # p < n keeps the restricted eigenvalue of a Gaussian design away from zero
    p: int = 50
    theta_true: tuple = DEFAULT_THETA
    rho: float = 0.5
    replications: int = 200
    seed: int = 0
    epsilon: float = 0.1
    sigma: float = 1.0
    noise: str = "iid"  # "iid" or "ar1" (clipped, with the exponential-inequality lambda)
    vartheta: float = 0.5
    clip: float = 3.0
    lam: float | None = None  # overrides the theoretical lambda (negative controls)
    kappa_budget: int = 1000
    kappa_steps: int = 100

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.noise not in ("iid", "ar1"):
            raise ValueError("noise must be 'iid' or 'ar1'")
        if self.lam is not None and self.lam < 0:
            raise ValueError("lam must be nonnegative")
        _theta_vector(self.theta_true, self.p)

    @property
    def theta(self):
        return _theta_vector(self.theta_true, self.p)


@dataclass(frozen=True)
class DensityConfig:
    n: int = 500
    centers: tuple = tuple(np.linspace(-6.0, 6.0, 13).tolist())
    width: float = 0.4
    mixture_centers: tuple = (-3.0, 0.0, 2.0)
    mixture_weights: tuple = (0.3, 0.4, 0.3)
    g: float = 0.2  # lambda = g sqrt(log p / n)
    replications: int = 50
    seed: int = 0
    dependent: bool = False
    vartheta: float = 0.5
    stay: float = 0.5
    max_support: int = 6
    error_factor: float = 5.0

    def __post_init__(self):
        if self.replications < 1 or self.n < 1:
            raise ValueError("need n >= 1 and replications >= 1")
        if self.g <= 0:
            raise ValueError("g must be positive")


def _parse_value(text, current):
    text = text.strip()
    if isinstance(current, bool):
        low = text.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if isinstance(current, tuple):
        parts = [t for t in text.replace("(", "").replace(")", "").split(",") if t.strip()]
        return tuple(float(t) for t in parts)
    if text.lower() == "none":
        return None
    if isinstance(current, int):
        return int(text)
    if isinstance(current, float) or current is None:
        return float(text)
    return ast.literal_eval(text) if text[:1] in "[({'\"" else text


def read_config_file(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def build_config(cls, raw: dict | None = None, **overrides):
    """Instantiate ``cls`` from string values (config file) plus typed overrides."""
    base = cls()
    names = {f.name for f in fields(cls)}
    kwargs = {}
    for key, value in (raw or {}).items():
        if key not in names:
            raise ValueError(f"unknown configuration key {key!r} for {cls.__name__}")
        kwargs[key] = _parse_value(value, getattr(base, key)) if isinstance(value, str) else value
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in names:
            raise ValueError(f"unknown configuration key {key!r} for {cls.__name__}")
        kwargs[key] = value
    return replace(base, **kwargs)


def config_dict(cfg) -> dict:
    out = asdict(cfg)
    return {k: list(v) if isinstance(v, tuple) else v for k, v in out.items()}


# ---------------------------------------------------------------------------
# regression simulation

def draw_design(cfg, r):
    key = 0 if getattr(cfg, "shared_design", False) else r
    return generate_design(DesignSpec(cfg.n, cfg.p, cfg.rho), rng=stream(cfg.seed, key, 0))


def draw_noise(cfg, r, vartheta, clip=None):
    rng = stream(cfg.seed, r, 1)
    if cfg.noise == "iid":
        spec = ProcessSpec("iid_gaussian", cfg.n, sigma=cfg.sigma, clip=clip)
        return processes.generate_iid(spec, rng=rng)
    eps = cfg.sigma * processes.generate_ar1(ProcessSpec("ar1", cfg.n, vartheta=vartheta), rng=rng)
    return eps if clip is None else np.clip(eps, -clip, clip)


def lambda_from_g(g, n, p):
    """lambda = g sqrt(log p / n)."""
    return g * math.sqrt(math.log(p) / n)


@dataclass
class Figure1Result:
    config: ExperimentConfig
    vartheta: np.ndarray
    g: np.ndarray
    replication: np.ndarray
    error: np.ndarray
    lam: np.ndarray
    support_size: np.ndarray
    converged: np.ndarray

    @property
    def nonconverged(self) -> int:
        return int((~self.converged).sum())

    def curves(self):
        """vartheta -> (g values, mean error, sd error), recomputed from the rows."""
        out = {}
        for vt in self.config.varthetas:
            sel = self.vartheta == vt
            gs = np.array(self.config.g_grid)
            errs = np.array([self.error[sel & (self.g == g)] for g in gs])
            sd = errs.std(axis=1, ddof=1) if errs.shape[1] > 1 else np.zeros(len(gs))
            out[vt] = (gs, errs.mean(axis=1), sd)
        return out

    def g_star(self):
        return {vt: float(g[np.argmin(m)]) for vt, (g, m, _) in self.curves().items()}

    def minima(self):
        return {vt: float(m.min()) for vt, (_, m, _) in self.curves().items()}

    def rows(self):
        return zip(self.vartheta, self.g, self.replication, self.error, self.lam,
                   self.support_size)

    def to_csv(self, path):
        return _write_rows(path, ["vartheta", "g", "replication", "error", "lambda", "support_size"],
                           self.rows())

    def to_svg(self, path):
        curves = {vt: (g, m) for vt, (g, m, _) in self.curves().items()}
        return emit_svg(curves, path, xlabel="g", ylabel="reconstruction error")


def run_figure1(cfg: ExperimentConfig | None = None, opts: SolverOptions | None = None):
    """LASSO reconstruction error sum_i (X_i'(theta_hat - theta))^2 along lambda = g sqrt(log p/n)."""
    cfg = cfg or ExperimentConfig()
    # the smallest lambdas with p > n sit on very flat valleys; allow a longer budget
    opts = opts or SolverOptions(max_iterations=2000 * cfg.p)
    theta = cfg.theta
    gs = np.array(cfg.g_grid, dtype=float)
    order = np.argsort(-gs, kind="stable")  # warm starts run from large to small lambda
    lams = lambda_from_g(gs, cfg.n, cfg.p)
    recs = []
    for r in range(cfg.replications):
        X = draw_design(cfg, r)
        for vt in cfg.varthetas:
            Y = X @ theta + draw_noise(cfg, r, vt)
            scale = math.sqrt(float(Y @ Y) / cfg.n) if cfg.standardize_response else 1.0
            obj = build_regression_objective(RegressionData(X, Y / scale))
            path = solve_path(obj, lams[order], opts)
            for k, sol in zip(order, path):
                fit = X @ (sol.theta * scale - theta)
                recs.append((vt, gs[k], r, float(fit @ fit), lams[k], sol.support.size, sol.converged))
    # deterministic layout: vartheta, then g, then replication
    pos = {vt: i for i, vt in enumerate(cfg.varthetas)}
    recs.sort(key=lambda t: (pos[t[0]], t[1], t[2]))
    cols = list(zip(*recs))
    return Figure1Result(
        cfg,
        np.array(cols[0], dtype=float),
        np.array(cols[1], dtype=float),
        np.array(cols[2], dtype=int),
        np.array(cols[3], dtype=float),
        np.array(cols[4], dtype=float),
        np.array(cols[5], dtype=int),
        np.array(cols[6], dtype=bool),
    )


def support_jaccard(a, b) -> float:
    a, b = set(map(int, a)), set(map(int, b))
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


# ---------------------------------------------------------------------------
# oracle inequality check

def ar1_exponential_constants(vartheta, clip):
    """(K, M, L1, L2, mu, Psi(1,1)) for clipped Gaussian AR(1) noise.

    The noise is eta-dependent with eta(r) = (2/sqrt(pi)) |vartheta|^r and
    bounded by the clip level, so the covariance condition holds with
    Psi(u, v) = u + v, K^2 = M = clip and rho = eta.
    """
    L1, L2, mu = dependence.geometric_summability(dependence.ar1_eta_constant(), vartheta)
    prm = dependence.eta_to_dn_params((L1, L2, mu), clip)
    return prm.K, prm.M_bound, prm.L1, prm.L2, prm.mu, prm.psi11


def oracle_profile(cfg: OracleCheckConfig):
    """Deviation profile used to set lambda* for one realized (scaled) design."""
    if cfg.noise == "iid":
        prof = calibration.iid_regression_profile(cfg.sigma)
        return lambda maxX: (prof, {})
    K, Mb, L1, L2, mu, psi11 = ar1_exponential_constants(cfg.vartheta, cfg.clip)

    def make(maxX):
        c = calibration.smallest_valid_c(K, Mb, L1, L2, mu, maxX, psi11, cfg.n, cfg.p, cfg.epsilon)
        prof = calibration.exp_regression_profile(K, Mb, L1, L2, mu, maxX, psi11, c)
        return prof, {"c": c, "constant": prof.scale}
    return make


@dataclass
class OracleCheckResult:
    config: OracleCheckConfig
    rows: list = field(default_factory=list)  # one dict per replication

    @property
    def included(self):
        return [r for r in self.rows if not r["excluded"]]

    @property
    def excluded(self) -> int:
        return sum(r["excluded"] for r in self.rows)

    @property
    def frequency(self) -> float:
        inc = self.included
        return float(np.mean([r["event"] for r in inc])) if inc else float("nan")

    @property
    def threshold(self) -> float:
        eps = self.config.epsilon
        reps = max(len(self.included), 1)
        return 1 - eps - 3 * math.sqrt(eps * (1 - eps) / reps)

    @property
    def passed(self) -> bool:
        return bool(self.included) and self.frequency >= self.threshold

    COLUMNS = ("replication", "lambda", "kappa", "risk_gap", "risk_bound", "l1_error",
               "l1_bound", "event", "converged", "excluded")

    def to_csv(self, path):
        return _write_rows(path, list(self.COLUMNS), ([r[c] for c in self.COLUMNS] for r in self.rows))

    def summary(self) -> str:
        cfg = self.config
        return (f"oracle check ({cfg.noise}, eps={cfg.epsilon:g}): frequency {self.frequency:.4f} "
                f"over {len(self.included)} replications ({self.excluded} excluded), "
                f"threshold {self.threshold:.4f}: {'PASS' if self.passed else 'FAIL'}")


def estimate_kappa(M, support, budget=1000, steps=100, seed=0):
    """kappa with J = support; exact for small p, otherwise the randomized upper bound.

    An upper bound on kappa makes both oracle bounds smaller, so the check
    stays conservative.
    """
    s = len(support)
    if M.shape[0] <= 8:
        return rep_exact(M, s, strict=False, support=support)
    return rep_randomized(M, s, budget=budget, seed=seed, strict=False, support=support,
                          steps=steps)


def run_oracle_check(cfg: OracleCheckConfig | None = None, profile=None,
                     opts: SolverOptions | None = None, kappa_cache=None) -> OracleCheckResult:
    """Frequency of {risk gap <= 4 lam^2 s / kappa and ||theta_hat - theta||_1 <= 2 lam s / kappa}.

    ``profile`` is a DeviationProfile, or a callable ``maxX -> (profile, info)``
    for profiles that depend on the realized design; by default it follows
    ``cfg.noise``.  Gaps and l1 errors are measured in the solver's
    unit-diagonal coordinates, where the theory's normalization holds.
    ``kappa_cache`` (a dict keyed by replication) lets several checks on the
    same designs share the restricted eigenvalue computations.
    """
    cfg = cfg or OracleCheckConfig()
    theta = cfg.theta
    support = np.flatnonzero(theta)
    s = support.size
    if profile is None:
        profile = oracle_profile(cfg)
    elif isinstance(profile, dependence.DeviationProfile):
        fixed = profile
        profile = lambda maxX: (fixed, {})  # noqa: E731
    cache = {} if kappa_cache is None else kappa_cache
    clip = cfg.clip if cfg.noise == "ar1" else None
    result = OracleCheckResult(cfg)
    for r in range(cfg.replications):
        X = draw_design(cfg, r)
        eps = draw_noise(cfg, r, cfg.vartheta, clip=clip)
        obj = build_regression_objective(RegressionData(X, X @ theta + eps))
        maxX = float(np.max(np.abs(X * obj.column_scale)))
        if cfg.lam is not None:
            lam, info = float(cfg.lam), {}
        else:
            prof, info = profile(maxX)
            lam = calibration.lambda_star_generic(prof, cfg.n, cfg.p, cfg.epsilon)
        if r not in cache:
            cache[r] = estimate_kappa(obj.gram, tuple(support), cfg.kappa_budget, cfg.kappa_steps,
                                      seed=cfg.seed + r).kappa
        kappa = cache[r]
        sol = solve(obj, lam, opts)
        gap = evaluate_risk_gap(obj, sol.theta, theta)
        l1 = float(np.abs(sol.theta_scaled - obj.to_scaled(theta)).sum())
        row = dict(replication=r, **{"lambda": lam}, kappa=kappa, risk_gap=gap, l1_error=l1,
                   converged=sol.converged, excluded=not kappa > 0, **info)
        if kappa > 0:
            rb, lb = 4 * lam * lam * s / kappa, 2 * lam * s / kappa
            row.update(risk_bound=rb, l1_bound=lb, event=bool(gap <= rb and l1 <= lb))
        else:
            row.update(risk_bound=float("nan"), l1_bound=float("nan"), event=False)
        result.rows.append(row)
    return result


# ---------------------------------------------------------------------------
# sparse density estimation

@dataclass
class DensityResult:
    config: DensityConfig
    rows: list
    benchmark: float  # mean L2 error of the least-squares fit on the true support

    COLUMNS = ("replication", "lambda", "support_size", "contains_truth", "l2_error",
               "l2_oracle", "success")

    @property
    def success_rate(self) -> float:
        return float(np.mean([r["success"] for r in self.rows]))

    def to_csv(self, path):
        return _write_rows(path, list(self.COLUMNS), ([r[c] for c in self.COLUMNS] for r in self.rows))

    def summary(self) -> str:
        cfg = self.config
        mode = "dependent (simulation choice: sticky labels + AR(1) offsets)" if cfg.dependent else "iid"
        return (f"density estimation, {mode} samples, n={cfg.n}: success {self.success_rate:.2f} "
                f"over {len(self.rows)} runs; benchmark L2 error {self.benchmark:.3e}")


def density_setup(cfg: DensityConfig):
    dic = density.build_gaussian_bump_dictionary(cfg.centers, cfg.width)
    mix = density.BumpMixture(tuple(cfg.mixture_centers), tuple(cfg.mixture_weights), cfg.width)
    return dic, mix


def run_density(cfg: DensityConfig | None = None, opts: SolverOptions | None = None,
                keep_estimates=False):
    """SPADES on repeated samples from a sparse bump mixture.

    A run succeeds when the support has at most ``max_support`` elements,
    contains every true bump, and the L2 error is at most ``error_factor``
    times the benchmark, the mean error of the least-squares fit restricted
    to the true support over the same runs.
    """
    cfg = cfg or DensityConfig()
    dic, mix = density_setup(cfg)
    theta_true = mix.theta(dic)
    truth = np.flatnonzero(theta_true)
    lam = cfg.g * math.sqrt(math.log(dic.p) / cfg.n)
    G = dic.gram[np.ix_(truth, truth)]
    rows, estimates = [], []
    for r in range(cfg.replications):
        z = density.draw_samples(mix, cfg.n, cfg.seed, r, cfg.dependent, cfg.vartheta, cfg.stay)
        sol = solve(density.build_density_objective(dic, z), lam, opts)
        oracle = np.zeros(dic.p)
        oracle[truth] = np.linalg.solve(G, dic.evaluate(z)[:, truth].mean(axis=0))
        supp = set(sol.support.tolist())
        rows.append(dict(
            replication=r, **{"lambda": lam}, support_size=len(supp),
            contains_truth=set(truth.tolist()) <= supp,
            l2_error=density.l2_error(dic, sol.theta, mix).value,
            l2_oracle=density.l2_error(dic, oracle, mix).value,
        ))
        if keep_estimates:
            estimates.append(sol.theta)
    bench = float(np.mean([row["l2_oracle"] for row in rows]))
    for row in rows:
        row["success"] = (row["support_size"] <= cfg.max_support and row["contains_truth"]
                          and row["l2_error"] <= cfg.error_factor * bench)
    res = DensityResult(cfg, rows, bench)
    if keep_estimates:
        res.estimates = estimates
    return res


# ---------------------------------------------------------------------------
# deviation checks

def run_deviation_check(kind="iid_gaussian", n=500, reps=1000, beta=0.4, vartheta=0.0,
                        alpha=0.0, sigma=1.0, seed=0, t_grid=None):
    """Check the Gaussian profile psi(t) = exp(-t^2 / 2 sigma^2) on one process."""
    spec = ProcessSpec(kind, n, seed=seed, sigma=sigma, vartheta=vartheta, beta=beta)
    prof = dependence.gaussian_profile(sigma, alpha)
    if t_grid is None:
        t_grid = np.linspace(0.5, 3.0, 6)
    return dependence.check_deviation_condition(spec, prof, t_grid, n, reps, seed)
