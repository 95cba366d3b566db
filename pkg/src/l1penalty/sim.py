"""Synthetic designs and the coverage / prediction-error / timing experiment.

Seeding
-------
Replication ``r`` (0-based) uses ``rep_seed = base_seed XOR splitmix64(r)``.
From it, ``SeedSequence(rep_seed, spawn_key=(k,))`` feeds disjoint streams:
k=0 design, k=1 coefficients, k=2 response noise, k=3 Monte Carlo quantile
seed, k=4 cross-validation fold seed.  With ``freeze_beta`` the coefficients
come from ``SeedSequence(base_seed, spawn_key=(1,))`` for every replication.
"""
from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import solvers
from .cv import CvConfig, cv_select
from .errors import DomainError, ExponentOverflowError, L1PenaltyError
from .model import EXPONENT_GUARD, Dataset, Family, ProblemSpec, standardize
from .penalty import (RNG_NAME, Method, coverage_check, lambda_mdt,
                      lambda_stein)
from .solvers import SolverConfig

MASK64 = (1 << 64) - 1
RECORD_COLUMNS = ["rep", "method", "lambda", "prediction_error", "coverage",
                  "select_seconds", "fit_seconds"]
TIMING_COLUMNS = ("select_seconds", "fit_seconds")

STREAM_DESIGN, STREAM_BETA, STREAM_NOISE, STREAM_MC, STREAM_CV = range(5)


def splitmix64(x: int) -> int:
    """SplitMix64 finalizer applied to x + golden-ratio increment."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def rep_seed(base_seed: int, rep: int) -> int:
    return (int(base_seed) & MASK64) ^ splitmix64(rep)


def substream(seed: int, k: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(seed), spawn_key=(k,))


def _rng(seed) -> np.random.Generator:
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(int(seed))
    return np.random.Generator(np.random.Philox(seed))


def _seed64(ss: np.random.SeedSequence) -> int:
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class SimDesign:
    n: int = 200
    p: int = 1000
    rho: float = 0.5
    sparsity: int = 10
    coef_law: str = "uniform_signed"
    coef_scale: float = 1.0
    family: Family = Family.LASSO
    sigma: float = 1.0
    replications: int = 100
    base_seed: int = 0
    freeze_beta: bool = False

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if self.n < 2 or self.p < 1:
            raise DomainError("need n >= 2 and p >= 1")
        if not 0 <= self.sparsity <= self.p:
            raise DomainError("sparsity must lie in [0, p]")
        if not 0.0 <= self.rho < 1.0:
            raise DomainError("rho must lie in [0, 1)")
        if self.replications < 1:
            raise DomainError("need at least one replication")
        if self.coef_law != "uniform_signed":
            raise DomainError(f"unknown coefficient law {self.coef_law!r}")
        if self.sigma < 0:
            raise DomainError("sigma must be non-negative")


def gen_design(design: SimDesign, seed) -> Dataset:
    """AR(1) Gaussian rows with Cov(x_j, x_k) = rho^|j-k|, then standardized."""
    rng = _rng(seed)
    Z = rng.standard_normal((design.n, design.p))
    X = np.empty_like(Z)
    X[:, 0] = Z[:, 0]
    rho = design.rho
    innov = math.sqrt(1.0 - rho * rho)
    for j in range(1, design.p):
        X[:, j] = rho * X[:, j - 1] + innov * Z[:, j]
    return standardize(Dataset(X))


def gen_beta(design: SimDesign, seed) -> np.ndarray:
    rng = _rng(seed)
    beta = np.zeros(design.p)
    for j in range(design.sparsity):
        v = 0.0
        while abs(v) < 1e-6:
            v = rng.uniform(-1.0, 1.0)
        beta[j] = design.coef_scale * v
    return beta


def gen_response(design: SimDesign, X: Dataset, beta_star, seed) -> Dataset:
    rng = _rng(seed)
    u = X.X @ np.asarray(beta_star, dtype=np.float64)
    if design.family is Family.POISSON_WSF:
        if np.any(np.abs(u) > EXPONENT_GUARD):
            raise ExponentOverflowError("linear predictor exceeds the exponent guard")
        Y = rng.poisson(np.exp(u)).astype(np.float64)
    else:
        Y = u + design.sigma * rng.standard_normal(design.n)
    return X.with_response(Y)


def prediction_error(X: Dataset, beta_hat, beta_star) -> float:
    d = X.X @ (np.asarray(beta_hat, dtype=np.float64) - np.asarray(beta_star, dtype=np.float64))
    return float(math.sqrt(d @ d / X.n))


@dataclass(frozen=True)
class ExperimentConfig:
    design: SimDesign = field(default_factory=SimDesign)
    methods: tuple = (Method.MDT, Method.STEIN_MC, Method.CV)
    alpha: float = 0.1
    c: float = 1.01
    draws: int = 1000
    cv: CvConfig = field(default_factory=CvConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "methods",
                           tuple(dict.fromkeys(Method.parse(m) for m in self.methods)))
        if not self.methods:
            raise DomainError("at least one method is required")

    @property
    def spec(self) -> ProblemSpec:
        return ProblemSpec.make(self.design.family, self.alpha, self.c, self.design.sigma)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        kw = {}
        for key, sub in (("design", SimDesign), ("cv", CvConfig), ("solver", SolverConfig)):
            if key in d:
                inner = dict(d.pop(key))
                bad = set(inner) - {f.name for f in fields(sub)}
                if bad:
                    raise DomainError(f"unknown {key} keys: {sorted(bad)}")
                kw[key] = sub(**inner)
        kw.update(d)
        if "methods" in kw:
            kw["methods"] = tuple(kw["methods"])
        return cls(**kw)

    def to_dict(self) -> dict:
        design = asdict(self.design)
        design["family"] = self.design.family.value
        return {"design": design, "methods": [m.value for m in self.methods],
                "alpha": self.alpha, "c": self.c, "draws": self.draws,
                "cv": asdict(self.cv), "solver": asdict(self.solver),
                "threads": self.threads}


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return ExperimentConfig.from_dict(json.load(fh))


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    records: list
    failures: list

    @property
    def summary(self) -> dict:
        per = {}
        for m in self.config.methods:
            rows = [r for r in self.records if r["method"] == m.value and r["ok"]]
            pe = np.array([r["prediction_error"] for r in rows])
            cov = np.array([r["coverage"] for r in rows])
            per[m.value] = {
                "replications_ok": len(rows),
                "median_prediction_error": float(np.median(pe)) if rows else None,
                "mean_prediction_error": float(np.mean(pe)) if rows else None,
                "coverage": float(np.mean(cov)) if rows else None,
                "total_select_seconds": float(sum(r["select_seconds"] for r in rows)),
                "total_fit_seconds": float(sum(r["fit_seconds"] for r in rows)),
                "nonconverged_fits": int(sum(not r["converged"] for r in rows)),
            }
        return {"rng": RNG_NAME, "config": self.config.to_dict(), "methods": per,
                "failures": self.failures}

    def records_csv(self, include_timing: bool = True) -> str:
        cols = [c for c in RECORD_COLUMNS if include_timing or c not in TIMING_COLUMNS]
        lines = [",".join(cols)]
        for r in self.records:
            lines.append(",".join(_cell(r[c]) for c in cols))
        return "\n".join(lines) + "\n"

    def write(self, out_dir) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        summary_path = out / "summary.json"
        records_path = out / "records.csv"
        summary_path.write_text(json.dumps(self.summary, indent=2) + "\n")
        records_path.write_text(self.records_csv())
        return summary_path, records_path

    def table(self) -> str:
        lines = [f"{'method':<10}{'median PE':>12}{'coverage':>10}{'select s':>12}"]
        for name, s in self.summary["methods"].items():
            med = "nan" if s["median_prediction_error"] is None else f"{s['median_prediction_error']:.4f}"
            cov = "nan" if s["coverage"] is None else f"{s['coverage']:.3f}"
            lines.append(f"{name:<10}{med:>12}{cov:>10}{s['total_select_seconds']:>12.3f}")
        return "\n".join(lines)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else ""
    return str(v)


def replication_data(config: ExperimentConfig, rep: int):
    """Regenerate (dataset, beta_star, seeds) for one replication."""
    design = config.design
    rs = rep_seed(design.base_seed, rep)
    X = gen_design(design, substream(rs, STREAM_DESIGN))
    beta_src = substream(design.base_seed, STREAM_BETA) if design.freeze_beta \
        else substream(rs, STREAM_BETA)
    beta = gen_beta(design, beta_src)
    ds = gen_response(design, X, beta, substream(rs, STREAM_NOISE))
    seeds = {"mc": _seed64(substream(rs, STREAM_MC)),
             "cv": _seed64(substream(rs, STREAM_CV))}
    return ds, beta, seeds


def select_penalty(config: ExperimentConfig, method: Method, ds: Dataset, seeds: dict):
    spec = config.spec
    if method is Method.MDT:
        return lambda_mdt(spec, ds.n, ds.p)
    if method is Method.STEIN_MC:
        return lambda_stein(spec, ds, config.draws, seeds["mc"])
    return cv_select(spec, ds, replace(config.cv, seed=seeds["cv"]), config.solver)


def _empty_record(rep, method):
    return {"rep": rep, "method": method.value, "lambda": None,
            "prediction_error": None, "coverage": None, "select_seconds": None,
            "fit_seconds": None, "converged": False, "ok": False}


def run_replication(config: ExperimentConfig, rep: int):
    records, failures = [], []
    try:
        ds, beta_star, seeds = replication_data(config, rep)
    except L1PenaltyError as exc:
        for m in config.methods:
            records.append(_empty_record(rep, m))
            failures.append({"rep": rep, "method": m.value, "error": str(exc)})
        return records, failures
    spec = config.spec
    for m in config.methods:
        rec = _empty_record(rep, m)
        try:
            t0 = time.perf_counter()
            est = select_penalty(config, m, ds, seeds)
            t1 = time.perf_counter()
            res = solvers.fit(spec, ds, est.lam, config.solver)
            t2 = time.perf_counter()
            rec.update({
                "lambda": float(est.lam),
                "prediction_error": prediction_error(ds, res.beta, beta_star),
                "coverage": int(coverage_check(spec, ds, beta_star, est.lam)),
                "select_seconds": t1 - t0, "fit_seconds": t2 - t1,
                "converged": bool(res.converged), "ok": True})
        except L1PenaltyError as exc:
            failures.append({"rep": rep, "method": m.value, "error": str(exc)})
        records.append(rec)
    return records, failures


def run_experiment(config: ExperimentConfig, progress=None) -> ExperimentReport:
    """Run every replication; results are assembled in replication order."""
    reps = range(config.design.replications)
    if config.threads == 1:
        outs = []
        for r in reps:
            outs.append(run_replication(config, r))
            if progress is not None:
                progress(r)
    else:
        workers = None if config.threads <= 0 else config.threads
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outs = list(pool.map(lambda r: run_replication(config, r), reps))
    records = [rec for recs, _ in outs for rec in recs]
    failures = [f for _, fs in outs for f in fs]
    if not any(r["ok"] for r in records):
        raise L1PenaltyError(f"all replications failed; first error: "
                             f"{failures[0]['error'] if failures else 'unknown'}")
    return ExperimentReport(config, records, failures)
