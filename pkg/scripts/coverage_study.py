"""Empirical coverage of the analytic and Monte Carlo penalty levels.

    python3 scripts/coverage_study.py [--family lasso] [--n 200] [--p 500] [--replications 300]

Coverage is the fraction of replications with c * ||grad L(beta*)||_inf <= lambda.
No model is fitted, so this runs much faster than the full experiment.
"""
import argparse

from l1penalty.penalty import coverage_check, lambda_mdt, lambda_stein
from l1penalty.sim import ExperimentConfig, SimDesign, replication_data


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--family", default="lasso")
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--p", type=int, default=500)
    ap.add_argument("--replications", type=int, default=300)
    ap.add_argument("--alpha", type=float, default=0.1)
    ap.add_argument("--c", type=float, default=1.01)
    ap.add_argument("--draws", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args(argv)

    cfg = ExperimentConfig(
        design=SimDesign(n=args.n, p=args.p, replications=args.replications,
                         base_seed=args.seed, family=args.family),
        alpha=args.alpha, c=args.c, draws=args.draws)
    spec = cfg.spec
    lam1 = lambda_mdt(spec, args.n, args.p).lam
    hit1 = hit2 = 0
    for rep in range(args.replications):
        ds, beta, seeds = replication_data(cfg, rep)
        hit1 += coverage_check(spec, ds, beta, lam1)
        hit2 += coverage_check(spec, ds, beta, lambda_stein(spec, ds, args.draws, seeds["mc"]).lam)
    R = args.replications
    print(f"target 1 - alpha = {1 - args.alpha:.3f}")
    print(f"mdt   coverage = {hit1 / R:.3f}  (lambda = {lam1:.5f})")
    print(f"stein coverage = {hit2 / R:.3f}")


if __name__ == "__main__":
    main()
