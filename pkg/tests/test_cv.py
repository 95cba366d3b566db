import csv

import numpy as np
import pytest
from hypothesis import given, strategies as st

from l1penalty.cv import CvConfig, cv_path, cv_select, fold_labels, write_loss_table
from l1penalty.errors import DomainError, FoldTooSmallError, NotStandardizedError
from l1penalty.model import Dataset, ProblemSpec, standardize
from l1penalty.penalty import Method


def data(n, p, seed, family="lasso", signal=True):
    r = np.random.default_rng(seed)
    X = standardize(Dataset(r.standard_normal((n, p)))).X
    b = np.zeros(p)
    if signal:
        b[:3] = [0.8, -0.6, 0.4]
    u = X @ b
    Y = r.poisson(np.exp(u)).astype(float) if family == "poisson-wsf" \
        else u + r.standard_normal(n)
    return Dataset(X, Y, standardized=True)


@given(n=st.integers(2, 300), k=st.integers(2, 12), seed=st.integers(0, 2 ** 63))
def test_fold_partition(n, k, seed):
    if k > n:
        return
    labels = fold_labels(n, k, seed)
    assert labels.shape == (n,)
    sizes = np.bincount(labels, minlength=k)
    assert sizes.sum() == n and sizes.max() - sizes.min() <= 1


def test_fold_labels_seeded():
    assert np.array_equal(fold_labels(50, 10, 3), fold_labels(50, 10, 3))
    assert not np.array_equal(fold_labels(50, 10, 3), fold_labels(50, 10, 4))


def test_config_validation():
    with pytest.raises(DomainError):
        CvConfig(folds=1)
    with pytest.raises(DomainError):
        CvConfig(grid_size=1)
    with pytest.raises(DomainError):
        CvConfig(grid_min_ratio=1.0)


def test_one_point_grid():
    ds = data(40, 10, 1)
    est = cv_select(ProblemSpec("lasso"), ds, CvConfig(folds=5), lambdas=[0.123])
    assert est.lam == 0.123 and est.method is Method.CV


@pytest.mark.parametrize("family", ["lasso", "sqrt-lasso", "poisson-wsf"])
def test_loss_matrix_shape_and_finite(family):
    ds = data(60, 15, 2, family)
    res = cv_path(ProblemSpec(family), ds, CvConfig(folds=5, grid_size=12, seed=9))
    assert res.losses.shape == (12, 5)
    assert np.all(np.isfinite(res.losses))
    assert np.all(np.diff(res.lambdas) < 0)
    assert res.best_lambda == res.lambdas[np.argmin(res.mean_loss)]


@pytest.mark.parametrize("seed", range(10))
def test_null_response_prefers_heavy_shrinkage(seed):
    ds = data(400, 20, 100 + seed, signal=False)
    res = cv_path(ProblemSpec("lasso"), ds, CvConfig(folds=10, grid_size=50, seed=seed))
    assert res.best_index < 25


def test_deterministic_selection():
    ds = data(60, 30, 3)
    sp = ProblemSpec("sqrt-lasso")
    a = cv_select(sp, ds, CvConfig(seed=11, grid_size=20))
    b = cv_select(sp, ds, CvConfig(seed=11, grid_size=20))
    assert a.lam == b.lam
    np.testing.assert_array_equal(a.extra["cv"].losses, b.extra["cv"].losses)


@pytest.mark.parametrize("family", ["lasso", "sqrt-lasso", "poisson-wsf"])
def test_warm_start_matches_cold(family):
    ds = data(50, 12, 4, family)
    sp = ProblemSpec(family)
    warm = cv_path(sp, ds, CvConfig(folds=5, grid_size=15, seed=2, warm_start=True))
    cold = cv_path(sp, ds, CvConfig(folds=5, grid_size=15, seed=2, warm_start=False))
    assert warm.best_index == cold.best_index


def test_thread_count_does_not_change_result():
    ds = data(60, 20, 5)
    sp = ProblemSpec("lasso")
    a = cv_path(sp, ds, CvConfig(folds=6, grid_size=10, seed=1, threads=1))
    b = cv_path(sp, ds, CvConfig(folds=6, grid_size=10, seed=1, threads=3))
    np.testing.assert_array_equal(a.losses, b.losses)


def test_fold_errors(rng):
    ds = data(15, 3, 6)
    with pytest.raises(FoldTooSmallError):
        cv_path(ProblemSpec("lasso"), ds, CvConfig(folds=20))
    with pytest.raises(FoldTooSmallError):
        cv_path(ProblemSpec("lasso"), ds, CvConfig(folds=10))
    raw = Dataset(rng.standard_normal((20, 3)) + 1, rng.standard_normal(20))
    with pytest.raises(NotStandardizedError):
        cv_path(ProblemSpec("lasso"), raw)


def test_loss_table(tmp_path):
    ds = data(40, 8, 7)
    res = cv_path(ProblemSpec("lasso"), ds, CvConfig(folds=4, grid_size=5, seed=0))
    out = tmp_path / "loss.csv"
    write_loss_table(out, res)
    rows = list(csv.DictReader(out.open()))
    assert list(rows[0]) == ["lambda_index", "lambda", "fold", "heldout_loss"]
    assert len(rows) == 20
    assert float(rows[7]["heldout_loss"]) == res.losses[1, 3]
