"""Solvers for argmin_beta L(beta) + lam * ||beta||_1.

* lasso: cyclic coordinate descent with exact soft-threshold updates and an
  active-set inner loop (compiled with numba);
* square-root lasso: alternate sigma = ||Y - X beta|| / sqrt(n) with a lasso
  solve at penalty lam * sigma, warm-started;
* poisson-wsf: proximal gradient with backtracking.

The public ``fit_*`` functions require a standardized dataset.  The
``*_arrays`` variants accept raw arrays with arbitrary column norms, which is
what cross-validation uses on training folds.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import (DomainError, NonFiniteError,
                     NotStandardizedError, ZeroResidualError)
from .model import (EXPONENT_GUARD, Dataset, Family, ProblemSpec, gradient_xy,
                    loss_xy)

ZERO_SNAP = 1e-12
SIGMA_FLOOR = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-7
    max_sweeps: int = 10_000
    sqrt_lasso_outer_iters: int = 50
    line_search_shrink: float = 0.5
    initial_step: float = 1.0

    def __post_init__(self):
        if not self.tol > 0:
            raise DomainError("tol must be positive")
        if self.max_sweeps < 1 or self.sqrt_lasso_outer_iters < 1:
            raise DomainError("iteration caps must be positive")
        if not 0.0 < self.line_search_shrink < 1.0:
            raise DomainError("line_search_shrink must lie in (0, 1)")
        if not self.initial_step > 0:
            raise DomainError("initial_step must be positive")


@dataclass(frozen=True)
class FitResult:
    beta: np.ndarray
    lam: float
    iterations: int
    kkt_residual: float
    objective: float
    converged: bool

    def to_dict(self) -> dict:
        return {"beta": [float(b) for b in self.beta], "lambda": self.lam,
                "iterations": self.iterations, "kkt_residual": self.kkt_residual,
                "objective": self.objective, "converged": self.converged}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def kkt_from_gradient(g, beta, lam: float) -> float:
    """Subgradient-optimality violation given the smooth-part gradient g."""
    g = np.asarray(g)
    beta = np.asarray(beta)
    nz = beta != 0
    viol = np.where(nz, np.abs(g + lam * np.sign(beta)),
                    np.maximum(np.abs(g) - lam, 0.0))
    return float(np.max(viol)) if viol.size else 0.0


def kkt_residual(spec: ProblemSpec, dataset: Dataset, beta, lam: float) -> float:
    beta = np.asarray(beta, dtype=np.float64)
    g = gradient_xy(spec.family, dataset.X, dataset.require_response(), beta)
    return kkt_from_gradient(g, beta, lam)


def objective_xy(family: Family, X, Y, beta, lam: float) -> float:
    return loss_xy(family, X, Y, beta) + lam * float(np.sum(np.abs(beta)))


def lambda_max_xy(family: Family, X, Y) -> float:
    """Smallest penalty with beta = 0 optimal: ||grad L(0)||_inf."""
    return float(np.max(np.abs(gradient_xy(family, X, Y, np.zeros(X.shape[1])))))


def _snap(beta):
    beta = beta.copy()
    beta[np.abs(beta) < ZERO_SNAP] = 0.0
    return beta


def _check_inputs(dataset: Dataset, lam: float):
    if not dataset.standardized:
        raise NotStandardizedError("solver expects a standardized dataset")
    Y = dataset.require_response()
    if not (lam >= 0 and math.isfinite(lam)):
        raise DomainError(f"penalty level must be finite and >= 0, got {lam}")
    return dataset.X, Y


def _start(beta0, p):
    if beta0 is None:
        return np.zeros(p)
    beta = np.array(beta0, dtype=np.float64).reshape(-1)
    if beta.shape[0] != p:
        raise DomainError("warm start has the wrong length")
    if not np.all(np.isfinite(beta)):
        raise NonFiniteError("warm start contains non-finite entries")
    return beta


# Lasso ----------------------------------------------------------------------

@numba.njit(cache=True, nogil=True)
def _soft(z, t):
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


@numba.njit(cache=True, nogil=True)
def _cd_update(Xf, r, beta, colsq, j, lam, n):
    xr = 0.0
    for i in range(n):
        xr += Xf[i, j] * r[i]
    old = beta[j]
    new = _soft(old * colsq[j] + xr / n, lam) / colsq[j]
    d = new - old
    if d != 0.0:
        for i in range(n):
            r[i] -= d * Xf[i, j]
        beta[j] = new
    return abs(d) * math.sqrt(colsq[j])


@numba.njit(cache=True, nogil=True)
def _lasso_kkt(Xf, Y, beta, r, lam):
    # Recomputes the residual from scratch to shed accumulated drift.
    n, p = Xf.shape
    for i in range(n):
        r[i] = Y[i]
    for j in range(p):
        b = beta[j]
        if b != 0.0:
            for i in range(n):
                r[i] -= b * Xf[i, j]
    worst = 0.0
    for j in range(p):
        g = 0.0
        for i in range(n):
            g -= Xf[i, j] * r[i]
        g /= n
        if beta[j] > 0.0:
            v = abs(g + lam)
        elif beta[j] < 0.0:
            v = abs(g - lam)
        else:
            v = abs(g) - lam
        if v > worst:
            worst = v
    return worst


@numba.njit(cache=True, nogil=True)
def _cd_lasso(Xf, Y, lam, beta, colsq, tol, max_sweeps):
    n, p = Xf.shape
    r = np.empty(n)
    sweeps = 0
    kkt = _lasso_kkt(Xf, Y, beta, r, lam)
    if kkt <= tol:
        return sweeps, kkt
    active = np.empty(p, dtype=np.int64)
    while sweeps < max_sweeps:
        for j in range(p):
            if colsq[j] > 0.0:
                _cd_update(Xf, r, beta, colsq, j, lam, n)
        sweeps += 1
        kkt = _lasso_kkt(Xf, Y, beta, r, lam)
        if kkt <= tol:
            break
        m = 0
        for j in range(p):
            if beta[j] != 0.0:
                active[m] = j
                m += 1
        while sweeps < max_sweeps and m > 0:
            biggest = 0.0
            for k in range(m):
                d = _cd_update(Xf, r, beta, colsq, active[k], lam, n)
                if d > biggest:
                    biggest = d
            sweeps += 1
            if biggest < 0.1 * tol:
                break
    return sweeps, kkt


def lasso_arrays(X, Y, lam: float, config: SolverConfig = SolverConfig(),
                 beta0=None) -> FitResult:
    X = np.asarray(X, dtype=np.float64)
    Y = np.ascontiguousarray(Y, dtype=np.float64)
    beta = _start(beta0, X.shape[1])
    colsq = np.mean(X * X, axis=0)
    beta[colsq == 0.0] = 0.0
    sweeps, _ = _cd_lasso(np.asfortranarray(X), Y, float(lam), beta, colsq,
                          0.5 * config.tol, int(config.max_sweeps))
    beta = _snap(beta)
    g = gradient_xy(Family.LASSO, X, Y, beta)
    kkt = kkt_from_gradient(g, beta, lam)
    return FitResult(beta, float(lam), int(sweeps), kkt,
                     objective_xy(Family.LASSO, X, Y, beta, lam), kkt <= config.tol)


def fit_lasso(dataset: Dataset, lam: float, config: SolverConfig = SolverConfig(),
              beta0=None) -> FitResult:
    X, Y = _check_inputs(dataset, lam)
    return lasso_arrays(X, Y, lam, config, beta0)


# Square-root lasso ----------------------------------------------------------

def sqrt_lasso_arrays(X, Y, lam: float, config: SolverConfig = SolverConfig(),
                      beta0=None) -> FitResult:
    """Scaled-lasso alternation.

    Uses sqrt-lasso(beta) = min_{s > 0} ||Y - X beta||^2 / (2 n s) + s / 2,
    so for fixed s the beta-step is a lasso at penalty lam * s.  The s-update
    is the plain fixed-point step s <- ||Y - X beta(s)|| / sqrt(n), sped up
    by a secant step once two iterates exist.  All inner lasso solves share
    one ``max_sweeps`` budget.  ``iterations`` counts outer (s) updates.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.ascontiguousarray(Y, dtype=np.float64)
    n, p = X.shape
    Xf = np.asfortranarray(X)
    beta = _start(beta0, p)
    colsq = np.mean(X * X, axis=0)
    beta[colsq == 0.0] = 0.0

    def sigma_of(b):
        r = Y - X @ b
        s = math.sqrt(float(r @ r) / n)
        if s < SIGMA_FLOOR:
            raise ZeroResidualError(
                "residual vanished; penalty too small for the square-root lasso")
        return s

    def certificate(b):
        return kkt_from_gradient(gradient_xy(Family.SQRT_LASSO, X, Y, b), b, lam)

    sigma = sigma_of(beta)
    kkt = certificate(beta)
    outer = 0
    budget = int(config.max_sweeps)
    prev = None
    while kkt > config.tol and outer < config.sqrt_lasso_outer_iters and budget > 0:
        # Inexact early solves: the inner tolerance tracks the outer residual.
        inner_tol = max(0.25 * config.tol, 0.1 * kkt) * sigma
        used, _ = _cd_lasso(Xf, Y, float(lam * sigma), beta, colsq, inner_tol, budget)
        budget -= used
        outer += 1
        phi = sigma_of(beta)
        kkt = certificate(beta)
        # Secant step on h(s) = phi(s) - s, clipped around the plain update.
        h = phi - sigma
        nxt = phi
        if prev is not None and h != prev[1]:
            s = sigma - h * (sigma - prev[0]) / (h - prev[1])
            if math.isfinite(s):
                nxt = min(max(s, 0.25 * phi), 4.0 * phi)
        prev = (sigma, h)
        sigma = nxt
    beta = _snap(beta)
    sigma_of(beta)
    kkt = certificate(beta)
    return FitResult(beta, float(lam), outer, kkt,
                     objective_xy(Family.SQRT_LASSO, X, Y, beta, lam), kkt <= config.tol)


def fit_sqrt_lasso(dataset: Dataset, lam: float, config: SolverConfig = SolverConfig(),
                   beta0=None) -> FitResult:
    X, Y = _check_inputs(dataset, lam)
    return sqrt_lasso_arrays(X, Y, lam, config, beta0)


# Poisson weighted score function -------------------------------------------

def _soft_vec(z, t):
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


@numba.njit(cache=True, nogil=True)
def _exp_remainder(x):
    # e^x - 1 - x without cancellation for small |x|
    if abs(x) < 1e-2:
        return x * x * (0.5 + x * (1.0 / 6 + x * (1.0 / 24 + x * (1.0 / 120 + x / 720))))
    return math.expm1(x) - x


@numba.njit(cache=True, nogil=True)
def _wsf_curvature_gap(Y, u, du, guard):
    """L(beta + d) - L(beta) - grad L(beta)'d for the WSF loss, given u = X beta
    and du = X d; +inf when beta + d trips the exponent guard."""
    n = Y.shape[0]
    total = 0.0
    for i in range(n):
        if abs(u[i] + du[i]) > guard:
            return np.inf
        h = 0.5 * u[i]
        dh = 0.5 * du[i]
        total += Y[i] * math.exp(-h) * _exp_remainder(-dh) + math.exp(h) * _exp_remainder(dh)
    return 2.0 * total / n


def poisson_wsf_arrays(X, Y, lam: float, config: SolverConfig = SolverConfig(),
                       beta0=None) -> FitResult:
    """Proximal gradient with backtracking on the quadratic upper bound.

    A step t is accepted when
    L(b+) <= L(b) + g'(b+ - b) + ||b+ - b||^2 / (2 t).  The left-minus-linear
    part is summed observation-wise from e^x - 1 - x remainders so the test
    stays meaningful at the 1e-16 level; candidates that trip the exponent
    guard count as rejections.  After each accepted step the
    trial step grows by 1/shrink, capped at ``initial_step``.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if np.any(Y < 0):
        raise DomainError("poisson-wsf requires non-negative responses")
    fam = Family.POISSON_WSF
    n = X.shape[0]
    beta = _start(beta0, X.shape[1])
    loss_xy(fam, X, Y, beta)  # validates the start against the exponent guard
    u = X @ beta
    g = X.T @ (np.exp(0.5 * u) - Y * np.exp(-0.5 * u)) / n
    shrink = config.line_search_shrink
    t = config.initial_step
    steps = 0
    kkt = kkt_from_gradient(g, beta, lam)
    while kkt > config.tol and steps < config.max_sweeps:
        while True:
            cand = _soft_vec(beta - t * g, t * lam)
            d = cand - beta
            du = X @ d
            if _wsf_curvature_gap(Y, u, du, EXPONENT_GUARD) <= float(d @ d) / (2.0 * t):
                break
            t *= shrink
            if t < 1e-30:
                break
        if t < 1e-30 or not np.any(d):
            break
        beta = cand
        u = X @ beta
        g = X.T @ (np.exp(0.5 * u) - Y * np.exp(-0.5 * u)) / n
        steps += 1
        kkt = kkt_from_gradient(g, beta, lam)
        t = min(config.initial_step, t / shrink)
    beta = _snap(beta)
    g = gradient_xy(fam, X, Y, beta)
    kkt = kkt_from_gradient(g, beta, lam)
    return FitResult(beta, float(lam), steps, kkt,
                     objective_xy(fam, X, Y, beta, lam), kkt <= config.tol)


def fit_poisson_wsf(dataset: Dataset, lam: float, config: SolverConfig = SolverConfig(),
                    beta0=None) -> FitResult:
    X, Y = _check_inputs(dataset, lam)
    return poisson_wsf_arrays(X, Y, lam, config, beta0)


_ARRAY_SOLVERS = {
    Family.LASSO: lasso_arrays,
    Family.SQRT_LASSO: sqrt_lasso_arrays,
    Family.POISSON_WSF: poisson_wsf_arrays,
}


def fit_arrays(family: Family, X, Y, lam: float, config: SolverConfig = SolverConfig(),
               beta0=None) -> FitResult:
    return _ARRAY_SOLVERS[Family.parse(family)](X, Y, lam, config, beta0)


def fit(spec: ProblemSpec, dataset: Dataset, lam: float,
        config: SolverConfig = SolverConfig(), beta0=None) -> FitResult:
    """Dispatch to the solver for ``spec.family``."""
    X, Y = _check_inputs(dataset, lam)
    return fit_arrays(spec.family, X, Y, lam, config, beta0)
