"""Checks for the in-repo normal and Student-t routines against scipy."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from metarep.distributions import (
    normal_cdf,
    normal_quantile,
    normal_sf,
    t_cdf,
    t_quantile,
    t_sf,
)

X_GRID = [-37.0, -8.0, -3.5, -1.0, -0.1, 0.0, 0.1, 1.0, 1.96, 3.5, 8.0, 37.0]
P_GRID = [1e-12, 1e-6, 0.001, 0.024, 0.025, 0.3, 0.5, 0.7, 0.975, 0.999, 1 - 1e-6, 1 - 1e-12]
DF_GRID = [1, 2, 3, 5, 9, 19, 50, 200]


@pytest.mark.parametrize("x", X_GRID)
def test_normal_cdf_matches_scipy(x):
    assert normal_cdf(x) == pytest.approx(stats.norm.cdf(x), rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("x", X_GRID)
def test_normal_sf_matches_scipy(x):
    assert normal_sf(x) == pytest.approx(stats.norm.sf(x), rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("p", P_GRID)
def test_normal_quantile_matches_scipy(p):
    # relative tolerance near the median degenerates; use abs there
    assert normal_quantile(p) == pytest.approx(stats.norm.ppf(p), rel=1e-11, abs=1e-11)


def test_normal_quantile_well_known_points():
    assert normal_quantile(0.975) == pytest.approx(1.959963984540054, abs=1e-12)
    assert normal_quantile(0.5) == 0.0
    assert normal_quantile(0.025) == pytest.approx(-1.959963984540054, abs=1e-12)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.1, math.nan])
def test_normal_quantile_rejects_bad_p(p):
    with pytest.raises(ValueError):
        normal_quantile(p)


@pytest.mark.parametrize("df", DF_GRID)
@pytest.mark.parametrize("x", [-20.0, -4.0, -1.2, 0.0, 0.5, 2.7, 12.0])
def test_t_cdf_matches_scipy(df, x):
    assert t_cdf(x, df) == pytest.approx(stats.t.cdf(x, df), rel=1e-10, abs=1e-14)


@pytest.mark.parametrize("df", DF_GRID)
@pytest.mark.parametrize("p", [1e-8, 0.01, 0.2, 0.5, 0.8, 0.99, 1 - 1e-8])
def test_t_quantile_matches_scipy(df, p):
    assert t_quantile(p, df) == pytest.approx(stats.t.ppf(p, df), rel=1e-8, abs=1e-8)


def test_t_cdf_df_one_is_cauchy():
    # closed form: 1/2 + arctan(x)/pi
    for x in (-3.0, -0.5, 0.0, 1.0, 10.0):
        assert t_cdf(x, 1) == pytest.approx(0.5 + math.atan(x) / math.pi, rel=1e-12)


def test_t_cdf_large_df_approaches_normal():
    assert t_cdf(1.5, 10_000_000) == pytest.approx(normal_cdf(1.5), abs=1e-6)


@pytest.mark.parametrize("df", [0, -1, 0.5])
def test_t_routines_reject_bad_df(df):
    with pytest.raises(ValueError):
        t_cdf(0.0, df)
    with pytest.raises(ValueError):
        t_quantile(0.5, df)


@given(st.floats(-30, 30))
def test_normal_cdf_plus_sf_is_one(x):
    assert normal_cdf(x) + normal_sf(x) == pytest.approx(1.0, abs=1e-14)


@given(st.floats(-10, 10), st.floats(-10, 10))
def test_normal_cdf_monotone(a, b):
    lo, hi = sorted((a, b))
    assert normal_cdf(lo) <= normal_cdf(hi)


@given(st.floats(1e-10, 1 - 1e-10))
@settings(max_examples=200)
def test_normal_quantile_roundtrip(p):
    assert normal_cdf(normal_quantile(p)) == pytest.approx(p, rel=1e-9, abs=1e-12)


@given(st.floats(0.001, 0.999), st.integers(1, 200))
def test_t_quantile_roundtrip(p, df):
    assert t_cdf(t_quantile(p, df), df) == pytest.approx(p, rel=1e-9, abs=1e-9)


@given(st.floats(-20, 20), st.integers(1, 100))
def test_t_symmetry(x, df):
    assert t_cdf(-x, df) == pytest.approx(t_sf(x, df), abs=1e-13)
