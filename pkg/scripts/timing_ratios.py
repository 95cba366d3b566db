"""Selection-time ratios CV / analytic and CV / Monte Carlo on one replication.

    python3 scripts/timing_ratios.py [--family lasso] [--n 200] [--p 1000] [--seed 2024]

Absolute seconds are hardware-bound; only the ratios are meant to be compared.
"""
import argparse
from dataclasses import replace

from l1penalty.sim import ExperimentConfig, SimDesign, run_experiment


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--family", default="lasso")
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--p", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args(argv)

    cfg = ExperimentConfig(design=SimDesign(n=args.n, p=args.p, replications=1,
                                            base_seed=args.seed, family=args.family))
    # Warm the compiled kernels so the CV time excludes JIT compilation.
    run_experiment(replace(cfg, design=replace(cfg.design, p=min(args.p, 50))))
    t = {r["method"]: r["select_seconds"] for r in run_experiment(cfg).records}
    print(f"{'method':<10}{'select seconds':>16}")
    for m, s in t.items():
        print(f"{m:<10}{s:>16.6f}")
    print(f"cv/mdt   = {t['cv'] / t['mdt']:.0f}")
    print(f"cv/stein = {t['cv'] / t['stein_mc']:.1f}")


if __name__ == "__main__":
    main()
