"""K-fold cross-validation baseline for choosing the penalty level."""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (DomainError, ExponentOverflowError, FoldTooSmallError,
                     NotStandardizedError, ZeroResidualError)
from .model import Dataset, Family, ProblemSpec, loss_xy
from .penalty import Method, PenaltyEstimate
from .solvers import SolverConfig, fit_arrays, lambda_max_xy


@dataclass(frozen=True)
class CvConfig:
    folds: int = 10
    grid_size: int = 50
    grid_min_ratio: float = 0.01
    seed: int = 0
    warm_start: bool = True
    threads: int = 1

    def __post_init__(self):
        if self.folds < 2:
            raise DomainError("need at least 2 folds")
        if self.grid_size < 2:
            raise DomainError("grid_size must be at least 2")
        if not 0.0 < self.grid_min_ratio < 1.0:
            raise DomainError("grid_min_ratio must lie in (0, 1)")


@dataclass(frozen=True)
class CvResult:
    lambdas: np.ndarray
    losses: np.ndarray  # grid_size x folds
    best_index: int
    folds: np.ndarray   # fold label per observation

    @property
    def mean_loss(self) -> np.ndarray:
        return self.losses.mean(axis=1)

    @property
    def best_lambda(self) -> float:
        return float(self.lambdas[self.best_index])


def fold_labels(n: int, folds: int, seed: int) -> np.ndarray:
    """Seeded shuffle of 0..n-1; the k-th shuffled index goes to fold k mod K."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    perm = rng.permutation(n)
    labels = np.empty(n, dtype=np.int64)
    labels[perm] = np.arange(n) % folds
    return labels


def lambda_grid(lam_max: float, size: int, min_ratio: float) -> np.ndarray:
    return lam_max * np.logspace(0.0, math.log10(min_ratio), size)


def heldout_loss(family: Family, X, Y, beta) -> float:
    """Squared error for the linear families, the WSF loss for Poisson."""
    if family is Family.POISSON_WSF:
        try:
            return loss_xy(family, X, Y, beta)
        except ExponentOverflowError:
            return math.inf
    r = Y - X @ beta
    return float(r @ r / len(Y))


# Linear-family paths stop refitting once the training fit explains this
# share of the centered response variation; later grid points reuse the fit.
SATURATION = 0.999


def _saturated(family, X, Y, beta) -> bool:
    if family is Family.POISSON_WSF:
        return False
    r = Y - X @ beta
    tss = float(np.sum((Y - Y.mean()) ** 2))
    return tss > 0 and float(r @ r) <= (1.0 - SATURATION) * tss


def _fold_path(family, X, Y, train, test, lambdas, solver_config, warm):
    Xtr, Ytr, Xte, Yte = X[train], Y[train], X[test], Y[test]
    out = np.full(len(lambdas), math.inf)
    beta = None
    for k, lam in enumerate(lambdas):
        if beta is not None and _saturated(family, Xtr, Ytr, beta):
            out[k:] = out[k - 1]
            break
        try:
            res = fit_arrays(family, Xtr, Ytr, lam, solver_config,
                             beta if warm else None)
        except (ZeroResidualError, ExponentOverflowError):
            # Smaller penalties only move further into the failing regime.
            break
        beta = res.beta
        out[k] = heldout_loss(family, Xte, Yte, beta)
    return out


def cv_path(spec: ProblemSpec, dataset: Dataset, config: CvConfig = CvConfig(),
            solver_config: SolverConfig = SolverConfig(), lambdas=None) -> CvResult:
    if not dataset.standardized:
        raise NotStandardizedError("cross-validation expects a standardized dataset")
    X, Y = dataset.X, dataset.require_response()
    n = dataset.n
    if config.folds > n:
        raise FoldTooSmallError(f"{config.folds} folds exceed n={n}")
    labels = fold_labels(n, config.folds, config.seed)
    sizes = np.bincount(labels, minlength=config.folds)
    if sizes.min() < 2:
        raise FoldTooSmallError(f"smallest fold has {sizes.min()} observations")
    if lambdas is None:
        lam_max = lambda_max_xy(spec.family, X, Y)
        lambdas = lambda_grid(lam_max, config.grid_size, config.grid_min_ratio)
    lambdas = np.sort(np.asarray(lambdas, dtype=np.float64).reshape(-1))[::-1]
    if lambdas.size == 0 or np.any(lambdas <= 0):
        raise DomainError("penalty grid must be non-empty and positive")

    jobs = [(spec.family, X, Y, labels != k, labels == k, lambdas, solver_config,
             config.warm_start) for k in range(config.folds)]
    if config.threads == 1:
        cols = [_fold_path(*job) for job in jobs]
    else:
        workers = None if config.threads <= 0 else config.threads
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cols = list(pool.map(lambda job: _fold_path(*job), jobs))
    losses = np.column_stack(cols)
    mean = losses.mean(axis=1)
    if not np.any(np.isfinite(mean)):
        raise ZeroResidualError("no penalty on the grid produced finite held-out losses")
    best = int(np.argmin(mean))
    return CvResult(lambdas, losses, best, labels)


def cv_select(spec: ProblemSpec, dataset: Dataset, config: CvConfig = CvConfig(),
              solver_config: SolverConfig = SolverConfig(), lambdas=None) -> PenaltyEstimate:
    """Penalty minimizing the mean held-out loss over the folds."""
    res = cv_path(spec, dataset, config, solver_config, lambdas)
    return PenaltyEstimate(res.best_lambda, Method.CV, None, 0, int(config.seed),
                           {"cv": res})


def write_loss_table(path, result: CvResult) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda_index", "lambda", "fold", "heldout_loss"])
        for i, lam in enumerate(result.lambdas):
            for k in range(result.losses.shape[1]):
                w.writerow([i, repr(float(lam)), k, repr(float(result.losses[i, k]))])
