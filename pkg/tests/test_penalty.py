import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from l1penalty.errors import (DomainError, InsufficientDrawsError,
                              NotStandardizedError)
from l1penalty.model import Dataset, ProblemSpec, standardize
from l1penalty.penalty import (Method, PenaltyEstimate, coverage_check,
                               lambda_mdt, lambda_stein, multiplier_maxima,
                               order_statistic_index)
from oracles import quantile_oracle


def ones_design(n):
    X = np.ones((n, 1))
    X[1::2] = -1.0  # mean 0, mean square 1; |sum x_i e_i| is |N(0, n)|
    return Dataset(X, standardized=True)


def test_mdt_paper_setting():
    est = lambda_mdt(ProblemSpec("lasso", 0.1, 1.01, 1.0), 200, 1000)
    target = 1.01 * quantile_oracle(1 - 0.1 / 2000) / math.sqrt(200)
    assert abs(est.lam - target) <= 1e-9
    assert abs(est.lam - 0.277893) <= 1e-4
    assert est.draws == 0 and est.method is Method.MDT
    assert abs(est.quantile - 3.890592) <= 1e-6


def test_mdt_scaling():
    a = lambda_mdt(ProblemSpec("lasso", theta=1.0), 200, 1000).lam
    assert lambda_mdt(ProblemSpec("lasso", theta=2.0), 200, 1000).lam == 2 * a
    assert lambda_mdt(ProblemSpec("lasso"), 800, 1000).lam == a / 2


def test_mdt_monotone_grids():
    alphas = np.linspace(0.01, 0.99, 60)
    lam = [lambda_mdt(ProblemSpec("lasso", a), 100, 50).lam for a in alphas]
    assert np.all(np.diff(lam) < 0)
    lam = [lambda_mdt(ProblemSpec("lasso"), 100, p).lam for p in range(1, 2000, 37)]
    assert np.all(np.diff(lam) > 0)


def test_mdt_domain():
    with pytest.raises(DomainError):
        lambda_mdt(ProblemSpec("lasso"), 0, 10)


def test_stein_p1_quantile():
    est = lambda_stein(ProblemSpec("lasso"), ones_design(1000), 50_000, seed=7)
    assert abs(est.quantile - 1.644854) <= 0.05
    assert est.lam == pytest.approx(1.01 * est.quantile / math.sqrt(1000))


def test_stein_deterministic_and_thread_independent(rng):
    ds = standardize(Dataset(rng.standard_normal((50, 30))))
    sp = ProblemSpec("sqrt-lasso")
    a = lambda_stein(sp, ds, 3000, seed=99, threads=1)
    b = lambda_stein(sp, ds, 3000, seed=99, threads=1)
    c = lambda_stein(sp, ds, 3000, seed=99, threads=3)
    assert a.lam == b.lam == c.lam
    assert lambda_stein(sp, ds, 3000, seed=100).lam != a.lam


def test_stein_alpha_monotone(rng):
    ds = standardize(Dataset(rng.standard_normal((40, 20))))
    lo = lambda_stein(ProblemSpec("lasso", alpha=0.05), ds, 1000, seed=3)
    hi = lambda_stein(ProblemSpec("lasso", alpha=0.1), ds, 1000, seed=3)
    assert lo.lam >= hi.lam


def test_sqrt_scheme_ignores_sigma(rng):
    ds = standardize(Dataset(rng.standard_normal((40, 20))))
    a = lambda_stein(ProblemSpec.make("sqrt-lasso", sigma=1.0), ds, 500, seed=5)
    b = lambda_stein(ProblemSpec.make("sqrt-lasso", sigma=7.0), ds, 500, seed=5)
    assert a.lam == b.lam


@given(k=st.sampled_from([0.5, 2.0, 4.0, 0.125]))
def test_lasso_scheme_column_scaling(k):
    r = np.random.default_rng(11)
    X = r.standard_normal((30, 8)) + 2.0  # deliberately not standardized
    sp = ProblemSpec("lasso")
    a = lambda_stein(sp, Dataset(X), 400, seed=1, require_standardized=False)
    b = lambda_stein(sp, Dataset(k * X), 400, seed=1, require_standardized=False)
    assert b.lam == pytest.approx(k * a.lam, rel=1e-13)


def test_lasso_scheme_theta_scaling(rng):
    ds = standardize(Dataset(rng.standard_normal((30, 8))))
    T1 = multiplier_maxima(ProblemSpec("lasso", theta=1.0), ds.X, 300, 4)
    T3 = multiplier_maxima(ProblemSpec("lasso", theta=3.0), ds.X, 300, 4)
    np.testing.assert_allclose(T3, 3 * T1, rtol=1e-14)


def test_stein_preconditions(rng):
    raw = Dataset(rng.standard_normal((20, 3)))
    with pytest.raises(InsufficientDrawsError):
        lambda_stein(ProblemSpec("lasso"), standardize(raw), 99, seed=0)
    with pytest.raises(NotStandardizedError):
        lambda_stein(ProblemSpec("lasso"), raw, 100, seed=0)


def test_order_statistic_index():
    assert order_statistic_index(0.1, 1000) == 900
    assert order_statistic_index(0.1, 50_000) == 45_000
    assert order_statistic_index(0.05, 101) == 96


def test_estimate_json():
    est = lambda_stein(ProblemSpec("poisson-wsf"), ones_design(10), 100, seed=2 ** 63 + 5)
    d = json.loads(est.to_json())
    assert set(d) == {"lambda", "method", "quantile", "draws", "seed"}
    assert d["method"] == "stein_mc" and d["draws"] == 100 and d["seed"] == 2 ** 63 + 5
    with pytest.raises(DomainError):
        PenaltyEstimate(0.0, Method.MDT, 1.0)
    with pytest.raises(DomainError):
        PenaltyEstimate(1.0, Method.MDT, 1.0, draws=10)


def test_coverage_check_cases(rng):
    X = standardize(Dataset(rng.standard_normal((20, 4)))).X
    b = np.array([1.0, 0.0, -1.0, 0.0])
    exact = Dataset(X, X @ b, standardized=True)
    assert coverage_check(ProblemSpec("lasso"), exact, b, 1e-9)
    noisy = exact.with_response(X @ b + rng.standard_normal(20))
    assert not coverage_check(ProblemSpec("lasso"), noisy, b, 0.0)
