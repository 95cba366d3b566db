"""Command-line interface: ``l1penalty {estimate,fit,cv,simulate}``.

JSON goes to stdout, diagnostics to stderr.  Exit codes: 0 success,
1 runtime failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import secrets
import sys
from importlib import resources
from pathlib import Path

from . import cv as cvmod
from . import sim, solvers
from .errors import DomainError, L1PenaltyError
from .model import Family, ProblemSpec, load_dataset, write_vector_csv
from .penalty import Method, PenaltyEstimate, lambda_mdt, lambda_stein
from .solvers import SolverConfig

FAMILIES = [f.value for f in Family]


def _random_seed() -> int:
    return secrets.randbits(63)


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


def _add_spec_args(p, alpha_required=False):
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--alpha", type=float, required=alpha_required,
                   default=None if alpha_required else 0.1)
    p.add_argument("--c", type=float, default=1.01)
    p.add_argument("--sigma", type=float, default=1.0,
                   help="known noise level (lasso only)")


def _add_data_args(p, need_y=True):
    p.add_argument("--x", help="CSV with the design matrix")
    if need_y:
        g = p.add_mutually_exclusive_group()
        g.add_argument("--y", help="CSV with the response (one column)")
        g.add_argument("--y-last", action="store_true",
                       help="response is the last column of --x")
    p.add_argument("--skip-header", action="store_true")


def _add_solver_args(p):
    p.add_argument("--tol", type=float, default=SolverConfig.tol)
    p.add_argument("--max-sweeps", type=int, default=SolverConfig.max_sweeps)
    p.add_argument("--sqrt-outer-iters", type=int,
                   default=SolverConfig.sqrt_lasso_outer_iters)


def _add_cv_args(p):
    p.add_argument("--folds", type=int, default=cvmod.CvConfig.folds)
    p.add_argument("--grid-size", type=int, default=cvmod.CvConfig.grid_size)
    p.add_argument("--grid-min-ratio", type=float, default=cvmod.CvConfig.grid_min_ratio)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="l1penalty",
        description="Penalty levels for l1-regularized regression via Gaussian approximations.")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker cap for parallel sections (0 = auto)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="analytic or Monte Carlo penalty level")
    _add_spec_args(p, alpha_required=True)
    p.add_argument("--method", choices=["mdt", "stein"], default="mdt")
    _add_data_args(p, need_y=False)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--draws", type=int, default=1000)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("fit", help="fit the l1-penalized estimator")
    _add_spec_args(p)
    _add_data_args(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--lambda", dest="lam", type=float)
    g.add_argument("--method", choices=["mdt", "stein", "cv"])
    p.add_argument("--draws", type=int, default=1000)
    p.add_argument("--seed", type=int)
    _add_solver_args(p)
    _add_cv_args(p)
    p.add_argument("--out-beta", help="write the coefficients to this CSV")
    p.add_argument("--verify", action="store_true",
                   help="recompute the KKT residual independently and report it")

    p = sub.add_parser("cv", help="K-fold cross-validation penalty selection")
    _add_spec_args(p)
    _add_data_args(p)
    _add_cv_args(p)
    _add_solver_args(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--loss-table", help="write per-(lambda, fold) held-out losses as CSV")

    p = sub.add_parser("simulate", help="run the coverage / prediction / timing experiment")
    p.add_argument("--config", help="experiment JSON, or the name of a bundled config")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--family", choices=FAMILIES)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--rho", type=float)
    p.add_argument("--sparsity", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--replications", type=int)
    p.add_argument("--base-seed", type=int)
    p.add_argument("--freeze-beta", action="store_true", default=None)
    p.add_argument("--methods", help="comma-separated subset of mdt,stein,cv")
    p.add_argument("--alpha", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--draws", type=int)
    p.add_argument("--folds", type=int)
    p.add_argument("--grid-size", type=int)
    return parser


def _spec(parser, args) -> ProblemSpec:
    try:
        return ProblemSpec.make(args.family, args.alpha, args.c, args.sigma)
    except DomainError as exc:
        parser.error(str(exc))


def _load(parser, args, need_y=True):
    if not args.x:
        parser.error("--x is required")
    if need_y and not (args.y or args.y_last):
        parser.error("give the response with --y or --y-last")
    return load_dataset(args.x, getattr(args, "y", None), getattr(args, "y_last", False),
                        args.skip_header)


def _solver_config(parser, args) -> SolverConfig:
    try:
        return SolverConfig(tol=args.tol, max_sweeps=args.max_sweeps,
                            sqrt_lasso_outer_iters=args.sqrt_outer_iters)
    except DomainError as exc:
        parser.error(str(exc))


def _cv_config(parser, args, seed) -> cvmod.CvConfig:
    try:
        return cvmod.CvConfig(folds=args.folds, grid_size=args.grid_size,
                              grid_min_ratio=args.grid_min_ratio, seed=seed,
                              threads=args.threads)
    except DomainError as exc:
        parser.error(str(exc))


def cmd_estimate(parser, args) -> int:
    spec = _spec(parser, args)
    if args.method == "stein":
        if not args.x:
            parser.error("--method stein needs the design matrix (--x)")
        ds = _load(parser, args, need_y=False)
        seed = _random_seed() if args.seed is None else args.seed
        est = lambda_stein(spec, ds, args.draws, seed, threads=args.threads)
    else:
        if args.x:
            ds = _load(parser, args, need_y=False)
            n, p = ds.n, ds.p
        elif args.n is None or args.p is None:
            parser.error("--method mdt needs --x or both --n and --p")
        else:
            n, p = args.n, args.p
        est = lambda_mdt(spec, n, p)
    print(est.to_json())
    return 0


def cmd_fit(parser, args) -> int:
    spec = _spec(parser, args)
    config = _solver_config(parser, args)
    ds = _load(parser, args)
    if args.lam is not None:
        if args.lam < 0:
            parser.error("--lambda must be non-negative")
        lam = args.lam
    else:
        seed = _random_seed() if args.seed is None else args.seed
        if args.method == "mdt":
            est = lambda_mdt(spec, ds.n, ds.p)
        elif args.method == "stein":
            est = lambda_stein(spec, ds, args.draws, seed, threads=args.threads)
        else:
            est = cvmod.cv_select(spec, ds, _cv_config(parser, args, seed), config)
        _info("penalty: " + est.to_json())
        lam = est.lam
    res = solvers.fit(spec, ds, lam, config)
    if not res.converged:
        _info(f"warning: solver did not converge (kkt residual {res.kkt_residual:.3g})")
    print(res.to_json())
    if args.out_beta:
        write_vector_csv(args.out_beta, res.beta)
    if args.verify:
        kkt = solvers.kkt_residual(spec, ds, res.beta, lam)
        ok = kkt <= config.tol
        _info(f"verify: kkt_residual={kkt:.6g} tol={config.tol:g} {'ok' if ok else 'FAILED'}")
        if res.converged and not ok:
            return 1
    return 0


def cmd_cv(parser, args) -> int:
    spec = _spec(parser, args)
    config = _solver_config(parser, args)
    ds = _load(parser, args)
    seed = _random_seed() if args.seed is None else args.seed
    res = cvmod.cv_path(spec, ds, _cv_config(parser, args, seed), config)
    if args.loss_table:
        cvmod.write_loss_table(args.loss_table, res)
    est = PenaltyEstimate(res.best_lambda, Method.CV, None, 0, seed)
    print(est.to_json())
    return 0


def bundled_config_path(name: str) -> Path | None:
    stem = name[:-5] if name.endswith(".json") else name
    ref = resources.files("l1penalty") / "configs" / f"{stem}.json"
    return Path(str(ref)) if ref.is_file() else None


def _experiment_config(parser, args) -> sim.ExperimentConfig:
    raw = {}
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            path = bundled_config_path(args.config)
            if path is None:
                parser.error(f"config {args.config!r} not found")
        with open(path) as fh:
            raw = json.load(fh)
    design = dict(raw.get("design", {}))
    for key in ("family", "n", "p", "rho", "sparsity", "sigma", "replications",
                "freeze_beta"):
        v = getattr(args, key)
        if v is not None:
            design[key] = v
    if args.base_seed is not None:
        design["base_seed"] = args.base_seed
    elif "base_seed" not in design:
        design["base_seed"] = _random_seed()
        _info(f"base_seed: {design['base_seed']}")
    raw["design"] = design
    for key in ("alpha", "c", "draws"):
        v = getattr(args, key)
        if v is not None:
            raw[key] = v
    if args.methods:
        raw["methods"] = [m.strip() for m in args.methods.split(",") if m.strip()]
    cv = dict(raw.get("cv", {}))
    if args.folds is not None:
        cv["folds"] = args.folds
    if args.grid_size is not None:
        cv["grid_size"] = args.grid_size
    raw["cv"] = cv
    raw["threads"] = args.threads
    try:
        return sim.ExperimentConfig.from_dict(raw)
    except (DomainError, TypeError) as exc:
        parser.error(f"bad experiment config: {exc}")


def cmd_simulate(parser, args) -> int:
    config = _experiment_config(parser, args)
    report = sim.run_experiment(config)
    summary_path, records_path = report.write(args.out_dir)
    print(report.table())
    _info(f"wrote {summary_path} and {records_path}")
    return 0


COMMANDS = {"estimate": cmd_estimate, "fit": cmd_fit, "cv": cmd_cv,
            "simulate": cmd_simulate}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](parser, args)
    except (L1PenaltyError, OSError) as exc:
        _info(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
