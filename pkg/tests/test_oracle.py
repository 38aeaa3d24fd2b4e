import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from clusterbounds.errors import SizeLimitError
from clusterbounds.integrals import radial_moment
from clusterbounds.model import Model, Volume
from clusterbounds.oracle import (EXACT_GAUSSIAN, HOPPING_SERIES, MC_REWEIGHT, MissingMomentError, cumulant,
                                  cumulants, default_sharps, hopping_applicable, l1_cluster_sum,
                                  lambda_derivative_check, moments_hopping, moments_mc, moments_to_cumulants,
                                  rescaling_check, twopoint_difference_check)
from clusterbounds.propagator import build_j_matrix, covariance_direct
from clusterbounds.gaussian import wick_moment

NN = Model.nearest_neighbor(1, 2.0, 0.5, 1.0)
PAIR = Volume.chain(2)
X, Y = (0,), (1,)
FOUR = [(X, False), (X, True), (Y, False), (Y, True)]
SIX = [(X, False), (X, False), (Y, False), (X, True), (Y, True), (Y, True)]


def cov(model, vol=PAIR):
    return covariance_direct(build_j_matrix(model, vol))


# -- moment to cumulant conversion ----------------------------------------------

def test_two_and_three_point_formulas():
    m = {(0,): 2.0, (1,): 3.0, (2,): 5.0, (0, 1): 7.0, (0, 2): 11.0, (1, 2): 13.0, (0, 1, 2): 17.0}
    assert moments_to_cumulants(2, m)[0] == 7.0 - 2.0 * 3.0
    expected = 17.0 - 2 * 13.0 - 3 * 11.0 - 5 * 7.0 + 2 * 2 * 3 * 5
    assert moments_to_cumulants(3, m)[0] == expected


@pytest.mark.parametrize("n", range(1, 8))
def test_poisson_cumulants(n):
    # all cumulants of a Poisson variable equal its mean
    mu = 1.3
    k = np.arange(0, 200)
    pmf = stats.poisson.pmf(k, mu)
    raw = lambda idx: float(np.sum(pmf * k.astype(float) ** len(idx)))
    assert moments_to_cumulants(n, raw)[0] == pytest.approx(mu, rel=1e-10)


def test_missing_moment():
    with pytest.raises(MissingMomentError):
        moments_to_cumulants(2, {(0, 1): 1.0})


def test_cumulant_cap():
    with pytest.raises(SizeLimitError):
        moments_to_cumulants(9, lambda idx: 0.0)


# -- exact Gaussian ----------------------------------------------------------------

def test_gaussian_two_point_is_covariance():
    m0 = NN.with_lambda(0.0)
    est = cumulant(m0, PAIR, [(X, False), (Y, True)])
    assert est.method == EXACT_GAUSSIAN and est.stderr == 0
    assert est.value == cov(m0)[0, 1]


@pytest.mark.parametrize("sources", [FOUR, SIX, [(X, False), (X, False), (X, True), (X, True)]])
def test_gaussian_higher_cumulants_vanish_exactly(sources):
    assert cumulant(NN.with_lambda(0.0), PAIR, sources).value == 0


def test_gaussian_complex_hopping():
    m0 = Model.nearest_neighbor(1, 2.0, 0.3 + 0.4j, 0.0)
    vol = Volume.chain(3)
    assert cumulant(m0, vol, [(X, False), (X, True), ((2,), False), (Y, True)]).value == 0


# -- hopping series and Monte Carlo --------------------------------------------------

def test_hopping_decoupled_factorizes():
    m = Model.nearest_neighbor(1, 2.0, 0.0, 1.0)
    est = moments_hopping(m, PAIR, FOUR)
    single = radial_moment(2.0, 0.25, 2) / radial_moment(2.0, 0.25, 0)
    assert est.value == pytest.approx(single ** 2, rel=1e-12)


@pytest.mark.parametrize("sources", [[(X, False), (Y, True)], FOUR, SIX])
def test_hopping_gaussian_limit_is_wick(sources):
    m0 = NN.with_lambda(0.0)
    est = moments_hopping(m0, PAIR, sources)
    xs = [PAIR.index(s) for s, star in sources if not star]
    ys = [PAIR.index(s) for s, star in sources if star]
    assert est.value == pytest.approx(wick_moment(cov(m0), xs, ys), abs=1e-10)


def test_hopping_precision_consistency():
    a = moments_hopping(NN, PAIR, FOUR)
    b = moments_hopping(NN, PAIR, FOUR, precision="mp")
    assert abs(complex(a.value) - complex(b.value)) <= a.stderr + 1e-13


def test_hopping_applicability():
    assert hopping_applicable(NN, PAIR)
    assert not hopping_applicable(NN, Volume.chain(3))


def test_mc_gaussian_two_point():
    m0 = NN.with_lambda(0.0)
    est = moments_mc(m0, PAIR, [(X, False), (Y, True)], seed=2, count=200_000)
    assert abs(est.value - cov(m0)[0, 1]) <= 5 * est.stderr


def test_mc_single_site_against_quadrature():
    vol = Volume.chain(1)
    est = moments_mc(NN, vol, [(X, False), (X, True)], seed=4, count=200_000)
    exact = radial_moment(2.0, 0.25, 2) / radial_moment(2.0, 0.25, 0)
    assert abs(est.value - exact) <= 3 * est.stderr


def test_phase_symmetry_zeroes_odd():
    est = cumulant(NN, PAIR, [(X, False)], method=MC_REWEIGHT, samples=10_000)
    assert est.value == 0


@pytest.mark.parametrize("sources", [[(X, False), (Y, True)], FOUR])
def test_mc_agrees_with_hopping(sources):
    h = cumulant(NN, PAIR, sources)
    mc = cumulant(NN, PAIR, sources, method=MC_REWEIGHT, samples=300_000, seed=9)
    assert h.method == HOPPING_SERIES
    assert h.agrees_with(mc, nsigma=4)


def test_mc_reproducible():
    a = cumulant(NN, PAIR, FOUR, method=MC_REWEIGHT, samples=5_000, seed=3)
    b = cumulant(NN, PAIR, FOUR, method=MC_REWEIGHT, samples=5_000, seed=3)
    assert a == b


def test_mc_volume_cap():
    with pytest.raises(SizeLimitError):
        moments_mc(NN, Volume.chain(7), [(X, False)], count=100)


# -- l1 sums and checks ---------------------------------------------------------------

def test_default_sharps():
    assert default_sharps(4) == (False, True, False, True)


def test_l1_sum_gaussian_two_point():
    m0 = NN.with_lambda(0.0)
    res = l1_cluster_sum(m0, PAIR, 2)
    assert res.value == pytest.approx(abs(cov(m0)[0, 0]) + abs(cov(m0)[0, 1]))
    assert l1_cluster_sum(NN, PAIR, 3).value == 0
    with pytest.raises(SizeLimitError):
        l1_cluster_sum(NN, Volume.chain(4), 2)


def test_lambda_derivatives_vanish_for_six_points():
    d0 = lambda_derivative_check(NN, PAIR, SIX, 0)
    d1 = lambda_derivative_check(NN, PAIR, SIX, 1)
    assert d0.derivative == 0
    assert d1.relative <= 1e-5


def test_lambda_derivative_nonzero_for_four_points():
    # first order in lambda is allowed for n = 4
    assert lambda_derivative_check(NN, PAIR, FOUR, 1).derivative > 1e-3


def test_two_point_difference_is_linear():
    res = twopoint_difference_check(NN, PAIR, 0.01)
    assert res.slope_ratio == pytest.approx(2.0, abs=0.05)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.5, 2.0))
def test_rescaling(eta):
    scaled, orig, factor = rescaling_check(NN, PAIR, FOUR, eta)
    assert complex(scaled.value) == pytest.approx(complex(orig.value) * factor, rel=1e-9)
