import math

import pytest
from hypothesis import given, settings, strategies as st

from clusterbounds.single_site import (SingleSiteParams, birnbaum_check, birnbaum_lhs, birnbaum_lower_bound,
                                       default_grid, gamma_half_check, gamma_quarter_check,
                                       gaussian_estimate_rhs, moment_bound_row, normalization,
                                       normalization_closed_form, quartic_estimate_rhs, tilted_moment,
                                       tilted_moment_direct)

params = st.builds(lambda j0, frac, lam: SingleSiteParams(j0, frac * j0, lam),
                   st.floats(0.1, 50), st.floats(0, 0.97), st.floats(1e-3, 1e3))


def test_invalid_params():
    with pytest.raises(ValueError):
        SingleSiteParams(1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        SingleSiteParams(1.0, 0.5, 0.0)


def test_gaussian_limit_normalization():
    # tiny lambda: N -> pi / J0
    assert normalization(SingleSiteParams(2.0, 0.0, 1e-12)) == pytest.approx(math.pi / 2, rel=1e-9)


def test_mass_shift():
    assert SingleSiteParams(2.0, 1.0, 8.0).mass_shift == pytest.approx(4.0)


def test_grid_has_27_points():
    grid = default_grid()
    assert len(grid) == 27 and len(set(grid)) == 27


@settings(max_examples=50, deadline=None)
@given(params)
def test_normalization_two_routes(p):
    assert normalization(p) == pytest.approx(normalization_closed_form(p), rel=1e-10)


@settings(max_examples=50, deadline=None)
@given(params)
def test_normalization_lower_bound(p):
    assert normalization(p) >= birnbaum_lower_bound(p)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1e4))
def test_mills_ratio(x):
    assert birnbaum_check(x)
    assert birnbaum_lhs(x) <= 1 / x if x > 0 else True


@settings(max_examples=30, deadline=None)
@given(params, st.integers(0, 12))
def test_tilted_moment_two_routes(p, m):
    assert tilted_moment(p, m) == pytest.approx(tilted_moment_direct(p, m), rel=1e-8)


@settings(max_examples=60, deadline=None)
@given(params, st.integers(0, 12))
def test_moment_below_both_bounds(p, m):
    row = moment_bound_row(p, m)
    assert row.holds
    assert row.gaussian_rhs == gaussian_estimate_rhs(p, m)
    assert row.quartic_rhs == quartic_estimate_rhs(p, m)


@pytest.mark.parametrize("m", range(0, 41))
def test_gamma_inequalities(m):
    assert gamma_half_check(m)
    assert gamma_quarter_check(m)


def test_moment_order_cap():
    with pytest.raises(ValueError):
        tilted_moment(SingleSiteParams(1.0, 0.0, 1.0), 65)
