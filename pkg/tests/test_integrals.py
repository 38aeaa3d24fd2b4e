import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from clusterbounds.errors import DivergentSeriesError
from clusterbounds.gaussian import wick_moment
from clusterbounds.integrals import (convergence_ratio, gaussian_radial_moment, pair_integral, radial_moment,
                                     radial_moment_mp, radial_moment_tavg, single_integral)


def test_gaussian_radial_moment_closed_form():
    # pi Gamma(p/2+1) / a^{p/2+1}
    assert radial_moment(2.0, 0.0, 0) == pytest.approx(math.pi / 2, rel=1e-15)
    assert radial_moment(1.0, 0.0, 4) == pytest.approx(2 * math.pi, rel=1e-15)
    assert gaussian_radial_moment(0.5, 2) == pytest.approx(math.pi * 4, rel=1e-15)


def test_quartic_only_limit():
    # a -> small, w=1: pi int_0^inf t^{p/2} e^{-t^2} dt = pi Gamma((p/2+1)/2) / 2
    val = radial_moment(1e-9, 1.0, 2)
    assert val == pytest.approx(math.pi * math.gamma(1.0) / 2, rel=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-3, 20), st.one_of(st.floats(0, 50), st.floats(1e3, 1e12)), st.integers(0, 16))
def test_radial_moment_matches_mpmath(a, w, p):
    ref = float(radial_moment_mp(repr(a), repr(w), p))
    assert radial_moment(a, w, p) == pytest.approx(ref, rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.01, 10), st.integers(0, 8))
def test_radial_moment_decreasing_in_weight(a, w, p):
    assert radial_moment(a, w, p) <= radial_moment(a, 0.0, p) * (1 + 1e-13)


@pytest.mark.parametrize("a,c,p,q", [(1.0, 0.5, 0, 0), (2.0, 3.0, 4, 1), (0.5, 0.1, 2, 2), (1.0, 0.0, 2, 3)])
def test_tavg_matches_t_quadrature(a, c, p, q):
    ref, _ = integrate.quad(lambda t: t ** q * radial_moment(a, c * t, p), 0, 1, epsabs=0, epsrel=1e-12)
    assert radial_moment_tavg(a, c, p, q) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("a,c", [(1e-4, 1.0), (2.0, 1e8)])
def test_tavg_extreme_weight_ratio(a, c):
    ref, _ = integrate.quad(lambda t: radial_moment(a, c * t, 2), 0, 1, points=[1e-6, 1e-3], epsabs=0,
                            epsrel=1e-10, limit=200)
    assert radial_moment_tavg(a, c, 2, 0) == pytest.approx(ref, rel=1e-8)


def gaussian_site(A):
    return lambda i, p: radial_moment(float(A[i][i].real), 0.0, p)


@pytest.mark.parametrize("m,ms", [((1, 0), (0, 1)), ((1, 1), (1, 1)), ((2, 0), (0, 2)), ((0, 0), (0, 0)),
                                  ((2, 1), (1, 2))])
def test_pair_integral_gaussian_is_wick(m, ms):
    C = np.array([[1.0, 0.3 + 0.1j], [0.3 - 0.1j, 0.8]])
    A = np.linalg.inv(C)
    res = pair_integral(A, m, ms, gaussian_site(A))
    norm = np.linalg.det(A).real / math.pi ** 2
    xs = [0] * m[0] + [1] * m[1]
    ys = [0] * ms[0] + [1] * ms[1]
    assert res.value * norm == pytest.approx(wick_moment(C, xs, ys), rel=1e-12, abs=1e-14)


def test_pair_integral_unbalanced_is_zero():
    A = np.array([[2.0, 0.5], [0.5, 2.0]])
    assert pair_integral(A, (1, 0), (0, 0), gaussian_site(A)).value == 0


def test_pair_integral_divergent_raises():
    A = np.array([[1.0, 0.99], [0.99, 1.0]])
    with pytest.raises(DivergentSeriesError):
        pair_integral(A, (0, 0), (0, 0), gaussian_site(A), ratio_cap=0.9)
    assert convergence_ratio(A) == pytest.approx(0.9801)


def test_pair_integral_quartic_against_mpmath_2d():
    # two sites, weights 0.25 |psi|^4, cross term expanded: check by independent polar quadrature
    A = np.array([[2.0, 0.4], [0.4, 1.5]])
    w = (0.25, 0.1)
    site = lambda i, p: radial_moment(float(A[i][i]), w[i], p)
    val = pair_integral(A, (1, 0), (1, 0), site).value

    def f(r0, r1, th):
        # angular integral of |psi0|^2 e^{-2 A01 r0 r1 cos th}: 2pi * 2pi I0 average done in th
        return (r0 * r1 * r0 ** 2 * math.exp(-A[0, 0] * r0 ** 2 - A[1, 1] * r1 ** 2 - w[0] * r0 ** 4
                                             - w[1] * r1 ** 4 - 2 * A[0, 1] * r0 * r1 * math.cos(th)))
    ref, _ = integrate.tplquad(lambda th, r1, r0: f(r0, r1, th), 0, 6, 0, 6, 0, 2 * math.pi, epsabs=1e-11)
    assert val.real == pytest.approx(2 * math.pi * ref, rel=1e-6)


def test_single_integral():
    site = lambda i, p: radial_moment(1.0, 0.0, p)
    assert single_integral(1.0, 1, 1, site) == pytest.approx(math.pi)
    assert single_integral(1.0, 1, 0, site) == 0
