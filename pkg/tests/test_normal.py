import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from l1penalty.errors import DomainError
from l1penalty.normal import phi_cdf, phi_inv, phi_inv_upper, phi_sf
from oracles import cdf_oracle, quantile_oracle


def test_cdf_at_zero():
    assert phi_cdf(0.0) == 0.5


def test_cdf_example_against_oracle():
    assert abs(phi_cdf(1.959964) - 0.975) <= 1e-6
    assert abs(phi_cdf(1.959964) - float(cdf_oracle(1.959964))) <= 1e-12


@pytest.mark.parametrize("x", [-8, -5.5, -3.2, -1, -0.3, 0.7, 2.5, 4.1, 6.0, 8.0])
def test_cdf_absolute_error(x):
    assert abs(phi_cdf(x) - float(cdf_oracle(x))) <= 1e-12


@pytest.mark.parametrize("x", [1.0, 3.0, 5.0, 7.5])
def test_sf_relative_error(x):
    ref = 1 - cdf_oracle(x)
    assert abs(phi_sf(x) - float(ref)) <= 1e-13 * float(ref)


def test_inverse_examples():
    assert phi_inv(0.5) == 0.0
    assert abs(phi_inv(0.975) - 1.959964) <= 1e-5
    assert abs(phi_inv(0.99995) - 3.890592) <= 1e-4


@pytest.mark.parametrize("q", [1e-8, 1e-5, 0.01, 0.3, 0.975, 0.99995])
def test_inverse_against_bisection_oracle(q):
    assert abs(phi_inv(q) - quantile_oracle(q)) <= 1e-9


def test_upper_tail_quantile_large_p():
    # alpha = 0.1, p = 1e6: tail 5e-8, beyond what 1 - tail keeps in float.
    assert abs(phi_inv_upper(5e-8) - quantile_oracle(1 - 5e-8)) <= 1e-9


@pytest.mark.parametrize("q", [0.0, 1.0, -0.1, 1.5, math.nan])
def test_inverse_domain(q):
    with pytest.raises(DomainError):
        phi_inv(q)


def test_monotone_on_dense_grids():
    xs = np.linspace(-9, 9, 20001)
    c = np.array([phi_cdf(x) for x in xs])
    assert np.all(np.diff(c) >= 0)
    qs = np.concatenate([np.logspace(-12, -0.31, 5000), 1 - np.logspace(-0.31, -12, 5000)])
    qs = np.unique(qs)
    inv = np.array([phi_inv(q) for q in qs])
    assert np.all(np.diff(inv) >= 0)


def test_inverse_consistency_sup():
    qs = np.concatenate([np.logspace(-8, math.log10(0.5), 4000),
                         1 - np.logspace(-8, math.log10(0.5), 4000)])
    assert max(abs(phi_cdf(phi_inv(q)) - q) for q in qs) <= 1e-10


@given(st.floats(-6, 0))
def test_round_trip_lower(x):
    assert abs(phi_inv(phi_cdf(x)) - x) <= 1e-9


@given(st.floats(0, 6))
def test_round_trip_upper_via_tail(x):
    # phi_cdf(x) near 1 is only known to 1.1e-16 absolute, i.e. about 2e-8 in x
    # at x = 6; the tail pair carries the full precision.
    assert abs(phi_inv_upper(phi_sf(x)) - x) <= 1e-9


@given(st.integers(1, 2 ** 40 - 1))
def test_symmetry(k):
    q = k / 2 ** 40  # 1 - q is exact
    assert abs(phi_inv(1 - q) + phi_inv(q)) <= 1e-10


@given(st.floats(-30, 30))
def test_cdf_reflection(x):
    assert abs(phi_cdf(-x) - (1 - phi_cdf(x))) <= 1e-14
