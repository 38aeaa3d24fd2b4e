"""Single-site measure d nu = N^{-1} exp(-J0|z|^2 - lambda/4 |z|^4) d^2z.

Moments are computed by quadrature and compared with two analytic upper
bounds: a Gaussian one (tilt by J_neq against J0 - J_neq) and a quartic one
(domination by the |z|^4 term).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate
from scipy.special import erfcx, gammaln

from .integrals import radial_moment

M_CAP = 64


@dataclass(frozen=True)
class SingleSiteParams:
    j0: float
    j_neq: float
    lam: float

    def __post_init__(self):
        if not (self.j0 > 0 and 0 <= self.j_neq < self.j0 and self.lam > 0):
            raise ValueError(f"invalid single-site parameters {self}")

    @property
    def mass_shift(self) -> float:
        """J0 + sqrt(lambda/2), the recurring prefactor of both bounds."""
        return self.j0 + math.sqrt(self.lam / 2)


def normalization(params: SingleSiteParams) -> float:
    """N = int_C exp(-J0|z|^2 - lambda/4 |z|^4) d^2z."""
    return radial_moment(params.j0, params.lam / 4, 0)


def normalization_closed_form(params: SingleSiteParams) -> float:
    """Same integral via the complementary error function (independent route)."""
    s = math.sqrt(params.lam)
    return math.pi * math.sqrt(math.pi) / s * erfcx(params.j0 / s)


def birnbaum_lower_bound(params: SingleSiteParams) -> float:
    return math.pi / params.mass_shift


def birnbaum_lhs(x: float) -> float:
    """e^{x^2/2} int_x^inf e^{-q^2/2} dq, computed stably."""
    return math.sqrt(math.pi / 2) * erfcx(x / math.sqrt(2))


def birnbaum_check(x: float) -> bool:
    """Mills-ratio inequality e^{x^2/2} int_x^inf e^{-q^2/2} dq >= 1/(x+1)."""
    return birnbaum_lhs(x) * (x + 1) >= 1.0


def tilted_moment(params: SingleSiteParams, m: int) -> float:
    """int d nu(z) e^{J_neq |z|^2} |z|^m."""
    if not 0 <= m <= M_CAP:
        raise ValueError(f"moment order must lie in [0, {M_CAP}]")
    a = params.j0 - params.j_neq
    return radial_moment(a, params.lam / 4, m) / normalization(params)


def tilted_moment_direct(params: SingleSiteParams, m: int) -> float:
    """Plain r-quadrature of the same moment, used as an independent cross-check."""
    a, w = params.j0 - params.j_neq, params.lam / 4

    def integral(a, p):
        # integrand peaks near the maximizer of (p+1) log r - a r^2 - w r^4
        peak = math.sqrt(max(p + 1, 1) / (2 * a))
        hi = peak + 12 * max(1 / math.sqrt(a), 1.0) + 12
        val, _ = integrate.quad(lambda r: r ** (p + 1) * math.exp(-a * r * r - w * r ** 4),
                                0, hi, points=[peak], epsabs=0, epsrel=1e-12, limit=400)
        return 2 * math.pi * val

    return integral(a, m) / integral(params.j0, 0)


def gaussian_estimate_rhs(params: SingleSiteParams, m: int) -> float:
    """2 (J0 + sqrt(lambda/2)) (J0 - J_neq)^{-(m+2)/2} sqrt(m!)."""
    a = params.j0 - params.j_neq
    return 2 * params.mass_shift * math.exp(-(m + 2) / 2 * math.log(a) + 0.5 * gammaln(m + 1))


def quartic_estimate_rhs(params: SingleSiteParams, m: int) -> float:
    """4 (J0 + sqrt(lambda/2)) (lambda/4)^{-(m+2)/4} (m!)^{1/4}."""
    return 4 * params.mass_shift * math.exp(-(m + 2) / 4 * math.log(params.lam / 4)
                                            + 0.25 * gammaln(m + 1))


def gamma_half_check(m: int) -> bool:
    """Gamma((m+2)/2) <= sqrt(m!)."""
    return gammaln((m + 2) / 2) <= 0.5 * gammaln(m + 1) + 1e-12


def gamma_quarter_check(m: int) -> bool:
    """Gamma((m+2)/4) <= 2 (m!)^{1/4}."""
    return gammaln((m + 2) / 4) <= math.log(2) + 0.25 * gammaln(m + 1) + 1e-12


@dataclass(frozen=True)
class MomentBoundRow:
    params: SingleSiteParams
    m: int
    moment: float
    gaussian_rhs: float
    quartic_rhs: float

    @property
    def holds(self) -> bool:
        return self.moment < self.gaussian_rhs and self.moment < self.quartic_rhs


def moment_bound_row(params: SingleSiteParams, m: int) -> MomentBoundRow:
    return MomentBoundRow(params, m, tilted_moment(params, m),
                          gaussian_estimate_rhs(params, m), quartic_estimate_rhs(params, m))


def default_grid() -> list[SingleSiteParams]:
    """27 parameter triples: J0 x (J_neq/J0) x lambda."""
    out = []
    for j0 in (0.5, 2.0, 10.0):
        for frac in (0.0, 0.5, 0.95):
            for lam in (0.01, 1.0, 100.0):
                out.append(SingleSiteParams(j0, frac * j0, lam))
    return out
