"""Penalty-level estimators.

``lambda_mdt`` is the closed-form normal-quantile level
``c * theta * Phi^{-1}(1 - alpha / 2p) / sqrt(n)``.  ``lambda_stein``
replaces the Bonferroni normal quantile with a Monte Carlo quantile of the
maximum of Gaussian multiplier sums built from the design.
"""
from __future__ import annotations

import enum
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InsufficientDrawsError, NotStandardizedError
from .model import Dataset, Family, ProblemSpec, gradient
from .normal import phi_inv_upper

MIN_DRAWS = 100
# Draws are generated in fixed-size blocks; block k has its own Philox stream
# keyed by SeedSequence(seed, spawn_key=(k,)).  The block size is part of the
# stream definition, so it must not depend on the worker count.
DRAW_BLOCK = 1024
RNG_NAME = (f"numpy.random.Philox(4x64-10)/SeedSequence, block={DRAW_BLOCK}, "
            f"numpy {np.__version__}")


class Method(str, enum.Enum):
    MDT = "mdt"
    STEIN_MC = "stein_mc"
    CV = "cv"

    @classmethod
    def parse(cls, value) -> "Method":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        key = {"stein": "stein_mc", "steinmc": "stein_mc"}.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise DomainError(f"unknown method {value!r}") from None


@dataclass(frozen=True)
class PenaltyEstimate:
    lam: float
    method: Method
    quantile: float | None
    draws: int = 0
    seed: int | None = None
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError(f"penalty level must be positive, got {self.lam}")
        if self.method is Method.MDT and self.draws != 0:
            raise DomainError("analytic estimate carries no Monte Carlo draws")

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "method": self.method.value,
                "quantile": self.quantile, "draws": self.draws, "seed": self.seed}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def lambda_mdt(spec: ProblemSpec, n: int, p: int) -> PenaltyEstimate:
    if n < 1 or p < 1:
        raise DomainError(f"need n >= 1 and p >= 1, got n={n}, p={p}")
    tail = spec.alpha / (2.0 * p)
    if tail >= 1.0:
        raise DomainError("alpha / 2p must be below 1")
    z = phi_inv_upper(tail)
    return PenaltyEstimate(spec.c * spec.theta * z / math.sqrt(n), Method.MDT, z)


def _block_maxima(spec: ProblemSpec, X: np.ndarray, seed: int, block: int,
                  size: int) -> np.ndarray:
    n = X.shape[0]
    ss = np.random.SeedSequence(seed, spawn_key=(block,))
    rng = np.random.Generator(np.random.Philox(ss))
    E = rng.standard_normal((size, n))
    S = E @ X
    if spec.family is Family.LASSO:
        S *= spec.theta
    elif spec.family is Family.SQRT_LASSO:
        S /= np.sqrt(np.mean(E * E, axis=1))[:, None]
    return np.max(np.abs(S), axis=1) / math.sqrt(n)


def multiplier_maxima(spec: ProblemSpec, X: np.ndarray, draws: int, seed: int,
                      threads: int = 1) -> np.ndarray:
    """Simulated statistics T_b = max_j |n^{-1/2} sum_i m_ij(e)|, b = 0..draws-1."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    sizes = [min(DRAW_BLOCK, draws - k * DRAW_BLOCK)
             for k in range(-(-draws // DRAW_BLOCK))]
    jobs = [(spec, X, seed, k, m) for k, m in enumerate(sizes)]
    if threads is None or threads <= 0:
        threads = min(len(jobs), _cpu_count())
    if threads == 1 or len(jobs) == 1:
        parts = [_block_maxima(*job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda job: _block_maxima(*job), jobs))
    return np.concatenate(parts)


def _cpu_count():
    if hasattr(os, "sched_getaffinity"):
        return max(1, len(os.sched_getaffinity(0)))
    return os.cpu_count() or 1


def order_statistic_index(alpha: float, draws: int) -> int:
    """1-based rank ceil((1 - alpha) * draws), robust to float round-up."""
    k = math.ceil((1.0 - alpha) * draws - 1e-9)
    return min(max(k, 1), draws)


def lambda_stein(spec: ProblemSpec, dataset: Dataset, draws: int, seed: int,
                 threads: int = 1, require_standardized: bool = True) -> PenaltyEstimate:
    """Monte Carlo penalty level from Gaussian multiplier maxima.

    The result depends only on (spec, dataset.X, draws, seed); ``threads``
    changes the schedule, not the streams.
    """
    if draws < MIN_DRAWS:
        raise InsufficientDrawsError(f"need at least {MIN_DRAWS} draws, got {draws}")
    if require_standardized and not dataset.standardized:
        raise NotStandardizedError("lambda_stein expects a standardized design")
    seed = int(seed)
    if seed < 0 or seed >= 2 ** 64:
        raise DomainError("seed must be a 64-bit unsigned integer")
    T = multiplier_maxima(spec, dataset.X, draws, seed, threads)
    k = order_statistic_index(spec.alpha, draws)
    z = float(np.partition(T, k - 1)[k - 1])
    return PenaltyEstimate(spec.c * z / math.sqrt(dataset.n), Method.STEIN_MC, z,
                           draws, seed, {"rng": RNG_NAME})


def coverage_check(spec: ProblemSpec, dataset: Dataset, beta_star, lam: float) -> bool:
    """True iff c * ||grad L(beta_star)||_inf <= lam."""
    g = gradient(spec, dataset, beta_star)
    return bool(spec.c * np.max(np.abs(g)) <= lam)
