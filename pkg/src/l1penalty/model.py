"""Data model and the three loss families.

Every loss is written on the linear predictor ``X @ beta``.  Matrices are
row-major by observation, so row ``i`` of ``X`` is the covariate vector of
observation ``i``.
"""
from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (ConstantColumnError, DataFormatError, DomainError,
                     ExponentOverflowError, NonFiniteError, ZeroResidualError)

EXPONENT_GUARD = 500.0
STANDARDIZED_MEAN_TOL = 1e-10
STANDARDIZED_MSQ_TOL = 1e-8


class Family(str, enum.Enum):
    LASSO = "lasso"
    SQRT_LASSO = "sqrt-lasso"
    POISSON_WSF = "poisson-wsf"

    @classmethod
    def parse(cls, value) -> "Family":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {"sqrtlasso": "sqrt-lasso", "poisson": "poisson-wsf",
                   "poissonwsf": "poisson-wsf"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise DomainError(f"unknown family {value!r}") from None


@dataclass(frozen=True)
class ProblemSpec:
    """Problem family plus the penalty tuning constants.

    ``theta`` is the noise scale entering the analytic penalty.  It is the
    known error standard deviation for the lasso and is pinned to 1 for the
    self-normalized families.
    """

    family: Family
    alpha: float = 0.1
    c: float = 1.01
    theta: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.c > 1.0:
            raise DomainError(f"c must exceed 1, got {self.c}")
        if not self.theta > 0.0:
            raise DomainError(f"theta must be positive, got {self.theta}")
        if self.family is not Family.LASSO and self.theta != 1.0:
            raise DomainError(f"theta is fixed at 1 for {self.family.value}")

    @classmethod
    def make(cls, family, alpha=0.1, c=1.01, sigma=1.0) -> "ProblemSpec":
        """Build a spec, using ``sigma`` as theta only where it applies."""
        family = Family.parse(family)
        theta = float(sigma) if family is Family.LASSO else 1.0
        return cls(family, float(alpha), float(c), theta)


def _frozen(a):
    a = np.array(a, dtype=np.float64, order="C")
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    Y: np.ndarray | None = None
    standardized: bool = False
    centers: np.ndarray | None = field(default=None, repr=False)
    scales: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2:
            raise DomainError("X must be a 2-d array")
        n, p = X.shape
        if n < 2 or p < 1:
            raise DomainError(f"need n >= 2 and p >= 1, got n={n}, p={p}")
        if not np.all(np.isfinite(X)):
            raise NonFiniteError("X contains non-finite entries")
        object.__setattr__(self, "X", _frozen(X))
        if self.Y is not None:
            Y = np.asarray(self.Y, dtype=np.float64).reshape(-1)
            if Y.shape[0] != n:
                raise DomainError(f"Y has length {Y.shape[0]}, expected {n}")
            if not np.all(np.isfinite(Y)):
                raise NonFiniteError("Y contains non-finite entries")
            object.__setattr__(self, "Y", _frozen(Y))
        for name in ("centers", "scales"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, _frozen(v))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def with_response(self, Y) -> "Dataset":
        return Dataset(self.X, Y, self.standardized, self.centers, self.scales)

    def require_response(self) -> np.ndarray:
        if self.Y is None:
            raise DomainError("dataset has no response vector")
        return self.Y

    def is_standardized(self) -> bool:
        """Check the column moment conditions numerically."""
        mean = self.X.mean(axis=0)
        msq = np.mean(self.X ** 2, axis=0)
        return bool(np.all(np.abs(mean) <= STANDARDIZED_MEAN_TOL)
                    and np.all(np.abs(msq - 1.0) <= STANDARDIZED_MSQ_TOL))


def standardize(dataset: Dataset) -> Dataset:
    """Center each column and scale it to unit mean square (1/n convention).

    The response is left untouched.  ``centers`` and ``scales`` recover the
    input columns as ``X_std * scales + centers``; they compose when the
    input was itself standardized.
    """
    X = dataset.X
    center = X.mean(axis=0)
    Xc = X - center
    scale = np.sqrt(np.mean(Xc ** 2, axis=0))
    bad = np.flatnonzero(scale <= 1e-14 * np.maximum(1.0, np.abs(center)))
    if bad.size:
        raise ConstantColumnError(int(bad[0]))
    Z = Xc / scale
    if dataset.centers is not None and dataset.scales is not None:
        center = dataset.centers + dataset.scales * center
        scale = dataset.scales * scale
    return Dataset(Z, dataset.Y, True, center, scale)


def _check_beta(beta, p):
    beta = np.asarray(beta, dtype=np.float64).reshape(-1)
    if beta.shape[0] != p:
        raise DomainError(f"beta has length {beta.shape[0]}, expected {p}")
    if not np.all(np.isfinite(beta)):
        raise NonFiniteError("beta contains non-finite entries")
    return beta


def _guarded_predictor(X, beta):
    u = X @ beta
    if np.any(np.abs(u) > EXPONENT_GUARD):
        raise ExponentOverflowError(
            f"|x'beta| = {np.max(np.abs(u)):.4g} exceeds guard {EXPONENT_GUARD}")
    return u


def _check_counts(Y):
    if np.any(Y < 0):
        raise DomainError("poisson-wsf requires non-negative responses")


# Array-level kernels.  These skip Dataset validation so the solvers and the
# cross-validation folds can call them on raw row subsets.

def loss_xy(family: Family, X, Y, beta) -> float:
    n = X.shape[0]
    if family is Family.POISSON_WSF:
        _check_counts(Y)
        h = 0.5 * _guarded_predictor(X, beta)
        return float(2.0 * np.sum(Y * np.exp(-h) + np.exp(h)) / n)
    r = Y - X @ beta
    if family is Family.LASSO:
        return float(r @ r / (2.0 * n))
    return float(np.sqrt(r @ r / n))


def gradient_xy(family: Family, X, Y, beta) -> np.ndarray:
    n = X.shape[0]
    if family is Family.POISSON_WSF:
        _check_counts(Y)
        h = 0.5 * _guarded_predictor(X, beta)
        return X.T @ (np.exp(h) - Y * np.exp(-h)) / n
    r = Y - X @ beta
    g = -(X.T @ r) / n
    if family is Family.LASSO:
        return g
    s = np.sqrt(r @ r / n)
    if s == 0.0:
        raise ZeroResidualError("square-root lasso gradient undefined at zero residual")
    return g / s


def score_matrix_xy(family: Family, X, Y, beta) -> np.ndarray:
    n = X.shape[0]
    if family is Family.POISSON_WSF:
        _check_counts(Y)
        u = _guarded_predictor(X, beta)
        w = -(Y - np.exp(u)) / np.exp(0.5 * u)
        return X * w[:, None]
    resid = X @ beta - Y
    if family is Family.LASSO:
        return X * resid[:, None]
    s = np.sqrt(resid @ resid / n)
    if s == 0.0:
        raise ZeroResidualError("square-root lasso score undefined at zero residual")
    return X * (resid / s)[:, None]


def loss(spec: ProblemSpec, dataset: Dataset, beta) -> float:
    """Loss value L(beta) for the spec's family."""
    beta = _check_beta(beta, dataset.p)
    return loss_xy(spec.family, dataset.X, dataset.require_response(), beta)


def gradient(spec: ProblemSpec, dataset: Dataset, beta) -> np.ndarray:
    beta = _check_beta(beta, dataset.p)
    return gradient_xy(spec.family, dataset.X, dataset.require_response(), beta)


def score_vectors(spec: ProblemSpec, dataset: Dataset, beta_star) -> np.ndarray:
    """Per-observation score rows W_i whose row mean is the gradient at beta_star."""
    beta = _check_beta(beta_star, dataset.p)
    return score_matrix_xy(spec.family, dataset.X, dataset.require_response(), beta)


# CSV input ------------------------------------------------------------------

def read_csv_matrix(path, skip_header: bool = False) -> np.ndarray:
    """Parse a comma-separated numeric file into a 2-d float64 array."""
    rows = []
    width = None
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if skip_header and lineno == 1:
                continue
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                values = [float(cell) for cell in row]
            except ValueError:
                raise DataFormatError("non-numeric entry", row=lineno) from None
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise DataFormatError(
                    f"expected {width} columns, found {len(values)}", row=lineno)
            if not all(np.isfinite(values)):
                raise DataFormatError("non-finite entry", row=lineno)
            rows.append(values)
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    return np.array(rows, dtype=np.float64)


def load_dataset(x_path, y_path=None, y_last_column: bool = False,
                 skip_header: bool = False, do_standardize: bool = True) -> Dataset:
    """Load X (and optionally Y) from CSV files and standardize X."""
    M = read_csv_matrix(x_path, skip_header)
    Y = None
    if y_last_column:
        if M.shape[1] < 2:
            raise DataFormatError(f"{x_path}: need at least two columns when Y is last")
        M, Y = M[:, :-1], M[:, -1]
    elif y_path is not None:
        Yraw = read_csv_matrix(y_path, skip_header)
        if Yraw.shape[1] != 1:
            raise DataFormatError(f"{y_path}: response file must have one column")
        Y = Yraw[:, 0]
    ds = Dataset(M, Y)
    return standardize(ds) if do_standardize else ds


def write_vector_csv(path, values) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        for v in np.asarray(values, dtype=np.float64).reshape(-1):
            fh.write(repr(float(v)) + "\n")
