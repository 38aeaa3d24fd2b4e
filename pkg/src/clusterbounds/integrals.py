"""Deterministic one- and two-site field integrals.

Single-site integrals reduce to radial moments

    M(a, w, p) = int_C |z|^p exp(-a|z|^2 - w|z|^4) d^2z
               = pi * int_0^inf t^{p/2} exp(-a t - w t^2) dt,

evaluated as pi Gamma(p/2+1) a^{-(p/2+1)} E[exp(-w S^2 / a^2)] with S a
Gamma(p/2+1) variable, which keeps every quadrature well scaled.

Two-site integrals with a Hermitian quadratic form A expand the cross term
exp(-A01 psi0* psi1 - A10 psi1* psi0) in powers; the angular integrals keep
only phase-balanced terms, each a product of two radial moments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import mpmath
import numpy as np
from scipy import integrate
from scipy.special import gammainc, gammaln

from .errors import DivergentSeriesError

QUAD_EPSREL = 1e-13


def _gamma_expectation(alpha: float, g: Callable[[float], float], scale: float | None = None,
                       cutoff: float | None = None) -> float:
    """E[g(S)] for S ~ Gamma(alpha, 1), g bounded by 1 and smooth.

    ``scale`` marks where g starts to fall off; ``cutoff`` is a point past
    which g vanishes to double precision.
    """
    lg = gammaln(alpha)

    def f(s):
        if s <= 0:
            return 0.0 if alpha > 1 else (g(0.0) if alpha == 1 else 0.0)
        return math.exp((alpha - 1) * math.log(s) - s - lg) * g(s)

    mode = max(alpha - 1, 0.0)
    hi = mode + 40 * math.sqrt(alpha) + 60
    if cutoff is not None:
        hi = min(hi, cutoff)
    marks = [0.5 * mode, mode, mode + 3 * math.sqrt(alpha)]
    if scale is not None:
        marks += [0.1 * scale, scale, 4 * scale]
    pts = sorted({p for p in marks if 0 < p < hi})
    val, _ = integrate.quad(f, 0.0, hi, points=pts or None, epsabs=0.0,
                            epsrel=QUAD_EPSREL, limit=400)
    return val


@lru_cache(maxsize=200_000)
def radial_moment(a: float, w: float, p: int) -> float:
    """int_C |z|^p exp(-a|z|^2 - w|z|^4) d^2z for a > 0, w >= 0."""
    if a <= 0:
        raise ValueError("radial_moment needs a > 0")
    alpha = p / 2 + 1
    gauss = math.pi * math.exp(gammaln(alpha) - alpha * math.log(a))
    if w == 0:
        return gauss
    beta = w / (a * a)
    return gauss * _gamma_expectation(alpha, lambda s: math.exp(-beta * s * s),
                                      scale=beta ** -0.5, cutoff=math.sqrt(750 / beta))


def gaussian_radial_moment(a: float, p: int) -> float:
    """Upper bound of radial_moment for every w >= 0 (the w=0 value)."""
    return radial_moment(a, 0.0, p)


def _phi(q: int, x: float) -> float:
    """int_0^1 t^q e^{-x t} dt."""
    if x < 1.0:
        total, term, j = 0.0, 1.0, 0
        while True:
            contrib = term / (q + 1 + j)
            total += contrib
            if abs(contrib) < 1e-18 * abs(total):
                return total
            j += 1
            term *= -x / j
    return math.exp(gammaln(q + 1) - (q + 1) * math.log(x)) * gammainc(q + 1, x)


@lru_cache(maxsize=200_000)
def radial_moment_tavg(a: float, c: float, p: int, q: int) -> float:
    """int_0^1 t^q M(a, c t, p) dt: a radial moment averaged over a linear weight ramp."""
    alpha = p / 2 + 1
    gauss = math.pi * math.exp(gammaln(alpha) - alpha * math.log(a))
    if c == 0:
        return gauss / (q + 1)
    beta = c / (a * a)
    return gauss * _gamma_expectation(alpha, lambda s: _phi(q, beta * s * s), scale=beta ** -0.5)


@lru_cache(maxsize=50_000)
def radial_moment_mp(a, w, p: int, dps: int = 40):
    """High-precision radial moment (mpmath); a and w may be strings or mpf."""
    with mpmath.workdps(dps):
        a, w = mpmath.mpf(a), mpmath.mpf(w)
        alpha = mpmath.mpf(p) / 2 + 1
        if w == 0:
            return +(mpmath.pi * mpmath.gamma(alpha) / a ** alpha)
        mode = (alpha - 1) / a
        width = mpmath.sqrt(alpha) / a
        pts = [0, mode / 2, mode + 0 * width, mode + 4 * width, mode + 20 * width, mpmath.inf]
        pts = sorted(set(pts))
        f = lambda t: t ** (alpha - 1) * mpmath.exp(-a * t - w * t * t)
        return +(mpmath.pi * mpmath.quad(f, pts))


@dataclass(frozen=True)
class SeriesResult:
    value: complex
    tail_bound: float
    terms: int


def convergence_ratio(A: np.ndarray) -> float:
    """|A01|^2 / (A00 A11): the asymptotic ratio of consecutive series terms."""
    return float(abs(A[0][1]) ** 2 / (A[0][0].real * A[1][1].real))


def pair_integral(A, m: Sequence[int], mstar: Sequence[int],
                  site_moment: Callable[[int, int], complex],
                  *, rtol: float = 1e-15, atol: float = 0.0, max_terms: int = 5000,
                  ratio_cap: float = 1.0) -> SeriesResult:
    """Unnormalized two-site integral.

        int d^2psi0 d^2psi1  psi0^m0 psi0*^ms0 psi1^m1 psi1*^ms1
            exp(-A00|psi0|^2 - A11|psi1|^2 - A01 psi0* psi1 - A10 psi1* psi0) W0 W1

    ``site_moment(i, p)`` must return int_C |z|^p exp(-A_ii |z|^2) W_i d^2z for
    radial weights 0 <= W_i <= 1; the Gaussian moments bound the tail.
    """
    a0, a1 = float(A[0][0].real), float(A[1][1].real)
    c01, c10 = A[0][1], A[1][0]
    delta = m[0] - mstar[0]
    if delta + (m[1] - mstar[1]) != 0:
        return SeriesResult(0j, 0.0, 0)
    rho = abs(c01) ** 2 / (a0 * a1)
    if rho >= ratio_cap:
        raise DivergentSeriesError("hopping series ratio too large", ratio=rho)
    s0, s1 = m[0] + mstar[0], m[1] + mstar[1]
    l_start = max(0, -delta)
    alpha0 = (s0 + delta) / 2 + 1
    alpha1 = (s1 + delta) / 2 + 1
    log_abs_c = math.log(abs(c01)) if c01 != 0 else -math.inf

    def log_gauss_term(l):
        j = l + delta
        p0, p1 = s0 + 2 * l + delta, s1 + 2 * l + delta
        return ((j + l) * log_abs_c - math.lgamma(j + 1) - math.lgamma(l + 1)
                + math.log(gaussian_radial_moment(a0, p0)) + math.log(gaussian_radial_moment(a1, p1)))

    total = 0
    l = l_start
    tail = math.inf
    while True:
        j = l + delta
        p0, p1 = s0 + 2 * l + delta, s1 + 2 * l + delta
        coef = (-c01) ** j * (-c10) ** l / (math.factorial(j) * math.factorial(l))
        total = total + coef * site_moment(0, p0) * site_moment(1, p1)
        if c01 == 0:
            return SeriesResult(total, 0.0, l - l_start + 1)
        nxt = l + 1
        f0 = max(1.0, (nxt + alpha0) / (nxt + 1))
        f1 = max(1.0, (nxt + alpha1) / (nxt + delta + 1))
        q = rho * f0 * f1
        if q < 1:
            tail = math.exp(log_gauss_term(nxt)) / (1 - q)
            if tail <= max(atol, rtol * abs(total)):
                return SeriesResult(total, tail, nxt - l_start)
        l = nxt
        if l - l_start > max_terms:
            raise DivergentSeriesError("hopping series did not converge", ratio=rho, tail=tail)


def single_integral(a: float, m: int, mstar: int, site_moment: Callable[[int, int], complex]) -> complex:
    """One-site analogue of :func:`pair_integral` (unnormalized)."""
    if m != mstar:
        return 0j
    return site_moment(0, m + mstar)
