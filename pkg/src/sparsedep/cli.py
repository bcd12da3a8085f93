"""Command line entry point: ``sparsedep <subcommand> [options]``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, calibration, experiment
from .repcheck import MAX_EXACT_P, rep_exact, rep_randomized


def _manifest(out: Path, command: str, config: dict, outputs, summary: dict):
    data = {
        "command": command,
        "version": __version__,
        "config": config,
        "outputs": sorted(str(p.name) for p in outputs),
        "summary": summary,
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return path


def _jsonable(x):
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not serializable: {type(x)}")


def _config(args, cls, **overrides):
    raw = experiment.read_config_file(args.config) if args.config else {}
    return experiment.build_config(cls, raw, seed=args.seed, **overrides)


def cmd_figure1(args):
    cfg = _config(args, experiment.ExperimentConfig, replications=args.replications)
    res = experiment.run_figure1(cfg)
    out = args.out
    files = [res.to_csv(out / "figure1.csv"), res.to_svg(out / "figure1.svg")]
    gstar, minima = res.g_star(), res.minima()
    for vt in cfg.varthetas:
        print(f"vartheta={vt:+.2f}  g*={gstar[vt]:.3f}  min mean error={minima[vt]:.4f}")
    print(f"lambda(g=0.2) = {experiment.lambda_from_g(0.2, cfg.n, cfg.p):.4f}")
    if res.nonconverged:
        print(f"warning: {res.nonconverged} solves did not converge", file=sys.stderr)
    summary = {"g_star": {str(k): v for k, v in gstar.items()},
               "minima": {str(k): v for k, v in minima.items()},
               "nonconverged": res.nonconverged}
    _manifest(out, "reproduce-figure1", experiment.config_dict(cfg), files, summary)
    return 0


def cmd_oracle(args):
    cfg = _config(args, experiment.OracleCheckConfig, noise=args.noise,
                  replications=args.replications, lam=args.lam)
    res = experiment.run_oracle_check(cfg)
    files = [res.to_csv(args.out / "oracle_check.csv")]
    print(res.summary())
    summary = {"frequency": res.frequency, "threshold": res.threshold, "passed": res.passed,
               "excluded": res.excluded}
    _manifest(args.out, "oracle-check", experiment.config_dict(cfg), files, summary)
    return 0 if res.passed or cfg.lam is not None else 1


def cmd_deviation(args):
    t_grid = np.array(args.t, dtype=float) if args.t else None
    rep = experiment.run_deviation_check(args.kind, n=args.n, reps=args.reps, beta=args.beta,
                                         vartheta=args.vartheta, alpha=args.alpha,
                                         sigma=args.sigma, seed=args.seed or 0, t_grid=t_grid)
    files = [rep.to_csv(args.out / "deviation_check.csv")]
    print(rep.summary())
    config = dict(kind=args.kind, n=args.n, reps=args.reps, beta=args.beta, vartheta=args.vartheta,
                  alpha=args.alpha, sigma=args.sigma, seed=args.seed or 0,
                  t_grid=[float(t) for t in rep.t_grid])
    _manifest(args.out, "deviation-check", config, files, {"violation": rep.any_violation})
    return 0


def cmd_calibrate(args):
    n, p, eps = args.n, args.p, args.epsilon
    rows = [("iid_regression", calibration.lambda_iid_regression(args.sigma, n, p, eps))]
    rows.append(("mz_regression", calibration.lambda_mz_regression(
        args.C, args.q, args.max_x, n, p, eps)))
    rows.append(("mz_regression_full_factorial", calibration.lambda_mz_regression(
        args.C, args.q, args.max_x, n, p, eps, full_factorial=True)))
    K, Mb, L1, L2, mu, psi11 = experiment.ar1_exponential_constants(args.vartheta, args.clip)
    c = args.c if args.c is not None else calibration.smallest_valid_c(
        K, Mb, L1, L2, mu, args.max_x, psi11, n, p, eps)
    exp_res = calibration.lambda_exp_regression(K, Mb, L1, L2, mu, args.max_x, psi11, c, n, p, eps)
    rows.append(("exp_regression_ar1", exp_res.lambda_star))
    rows.append(("density_iid", calibration.lambda_density_iid(1.0, n, p, eps)))
    lines = ["quantity,value"]
    for name, val in rows:
        print(f"{name:30s} {val:.6g}")
        lines.append(f"{name},{val:.17g}")
    print(f"{'exp_regression_ar1 constant':30s} {exp_res.constant:.6g} (c={c:.6g}, "
          f"valid={exp_res.valid})")
    lines.append(f"exp_regression_ar1_constant,{exp_res.constant:.17g}")
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / "calibration.csv"
    path.write_text("\n".join(lines) + "\n")
    config = dict(n=n, p=p, epsilon=eps, sigma=args.sigma, C=args.C, q=args.q, max_x=args.max_x,
                  vartheta=args.vartheta, clip=args.clip, c=c)
    _manifest(args.out, "calibrate", config, [path], dict(rows))
    return 0


def _read_matrix(path):
    try:
        M = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError:
        M = np.loadtxt(path, delimiter=",", ndmin=2, skiprows=1)
    return M


def cmd_rep(args):
    M = _read_matrix(args.gram)
    method = args.method
    if method == "auto":
        method = "exact" if M.shape[0] <= min(8, MAX_EXACT_P) else "randomized"
    strict = not args.non_strict
    if method == "exact":
        est = rep_exact(M, args.s, strict=strict)
    else:
        est = rep_randomized(M, args.s, budget=args.budget, seed=args.seed or 0, strict=strict)
    print(f"kappa = {est.kappa:.10g}")
    print(f"method = {est.method}  (s={est.s}, {'|J| < s' if strict else '|J| <= s'})")
    print(f"J = {list(est.J)}")
    print("v = " + " ".join(f"{x:.6g}" for x in est.v))
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / "rep_check.json"
    path.write_text(json.dumps(est.as_dict(), indent=2, sort_keys=True) + "\n")
    config = dict(gram=str(args.gram), s=args.s, method=method, strict=strict, budget=args.budget,
                  seed=args.seed)
    _manifest(args.out, "rep-check", config, [path], {"kappa": est.kappa})
    return 0


def cmd_density(args):
    cfg = _config(args, experiment.DensityConfig, replications=args.replications,
                  dependent=True if args.dependent else None)
    res = experiment.run_density(cfg, keep_estimates=True)
    dic, mix = experiment.density_setup(cfg)
    grid = np.linspace(*dic.window, 801)
    files = [
        res.to_csv(args.out / "density_runs.csv"),
        experiment.density.write_density_csv(args.out / "density_truth.csv", grid, mix(grid)),
        experiment.density.write_density_csv(args.out / "density_estimate.csv", grid,
                                             dic.density(res.estimates[0], grid)),
    ]
    print(res.summary())
    _manifest(args.out, "simulate-density", experiment.config_dict(cfg), files,
              {"success_rate": res.success_rate, "benchmark": res.benchmark})
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed (u64)")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--config", type=Path, default=None, help="key = value config file")

    parser = argparse.ArgumentParser(prog="sparsedep", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reproduce-figure1", parents=[common], help="LASSO error curves over g")
    p.add_argument("--replications", type=int, default=None)
    p.set_defaults(func=cmd_figure1)

    p = sub.add_parser("oracle-check", parents=[common], help="empirical oracle inequality")
    p.add_argument("--noise", choices=["iid", "ar1"], default=None)
    p.add_argument("--replications", type=int, default=None)
    p.add_argument("--lam", type=float, default=None, help="override lambda (negative control)")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("deviation-check", parents=[common], help="Monte Carlo check of psi")
    p.add_argument("--kind", default="iid_gaussian",
                   choices=["iid_gaussian", "ar1", "long_memory_gaussian", "hermite2_of_long_memory"])
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--beta", type=float, default=0.4)
    p.add_argument("--vartheta", type=float, default=0.0)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--t", type=float, nargs="*", default=None, help="t grid")
    p.set_defaults(func=cmd_deviation)

    p = sub.add_parser("calibrate", parents=[common], help="theoretical lambda values")
    p.add_argument("--n", type=int, default=30)
    p.add_argument("--p", type=int, default=50)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--max-x", dest="max_x", type=float, default=1.0)
    p.add_argument("--vartheta", type=float, default=0.5)
    p.add_argument("--clip", type=float, default=3.0)
    p.add_argument("--c", type=float, default=None, help="default: smallest valid c")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("rep-check", parents=[common], help="restricted eigenvalue of a Gram CSV")
    p.add_argument("gram", type=Path)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--method", choices=["auto", "exact", "randomized"], default="auto")
    p.add_argument("--budget", type=int, default=1000)
    p.add_argument("--non-strict", action="store_true", help="allow |J| = s")
    p.set_defaults(func=cmd_rep)

    p = sub.add_parser("simulate-density", parents=[common], help="sparse density estimation")
    p.add_argument("--replications", type=int, default=None)
    p.add_argument("--dependent", action="store_true")
    p.set_defaults(func=cmd_density)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is not None and not 0 <= args.seed < 2**64:
        parser.error("--seed must be an unsigned 64-bit integer")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
