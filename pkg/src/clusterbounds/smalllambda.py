"""Near-Gaussian cluster expansion for small lambda.

Polymer activities zeta~ built from the forest interpolation of the
covariance, the exact partition identity on two sites, the single-polymer
derivative bound, the constant ledger K2..K6 and the explicit right-hand
sides of the small-lambda clustering theorems.

Constants can be astronomically large (K2 grows like exp(1/mu0^2) for weak
decay), so the ledger keeps natural logarithms and exposes floats that may
overflow to inf.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate, optimize
from scipy.special import gammaln, i0e

from .errors import InvalidNError, SizeLimitError
from .estimates import Estimate
from .gaussian import LaplaceEdgeOp, WeightedFieldPolynomial, apply_laplace_edge, sample_gaussian
from .integrals import pair_integral, radial_moment, radial_moment_tavg
from .model import Model, Site, Volume
from .propagator import build_j_matrix, covariance_direct, decay_constants, l1_constant

H_ORDER = 24
H_ORDER_CHECK = 16
ZETA_M_CAP = 2


# -- scaling ---------------------------------------------------------------------

def scaling_eta(model: Model) -> float:
    j0, jn = model.j0, model.j_neq
    return math.sqrt(j0 / (jn * (j0 - jn)))


def rescale_to_unit_k0(model: Model) -> tuple[Model, float]:
    """psi -> psi / eta: coupling eta^2 J and quartic eta^4 lambda give K0 = 1."""
    eta = scaling_eta(model)
    scaled = model.scaled(eta * eta).with_lambda(model.lam * eta ** 4)
    return scaled, eta


# -- constant ledger ---------------------------------------------------------------

def _log_factorial(n: int) -> float:
    return float(gammaln(n + 1))


def log_k21(d: int) -> float:
    """log of floor(2 pi^{d/2} d^{d/2} / Gamma(d/2+1))!."""
    inner = 2 * math.pi ** (d / 2) * d ** (d / 2) / math.exp(gammaln(d / 2 + 1))
    # guard against 3.9999999 style rounding of exact integers
    n = math.floor(inner + 1e-12)
    return _log_factorial(n)


def _k22_objective(x: float, d: int, alpha: float) -> float:
    b = alpha * math.exp(gammaln(d / 2 + 1) / d) / (2 ** (2 + 1 / d) * math.sqrt(math.pi))
    c = alpha * math.sqrt(d) / 4
    return x * math.log(x) - b * x ** (1 + 1 / d) + c * x


def log_k22(d: int, alpha: float) -> float:
    """sup over x >= 1 of x log x - b x^{1+1/d} + c x (the log of K_{2,2}).

    The objective is concave beyond its first critical point and eventually
    decreasing, so a bracketed bounded maximization on [1, x_hi] suffices;
    x_hi is where the negative power term dominates the rest by a margin.
    """
    b = alpha * math.exp(gammaln(d / 2 + 1) / d) / (2 ** (2 + 1 / d) * math.sqrt(math.pi))
    c = alpha * math.sqrt(d) / 4
    x_hi = 2.0
    # derivative: log x + 1 + c - b (1+1/d) x^{1/d} < 0 for all x >= x_hi
    while math.log(x_hi) + 1 + c - b * (1 + 1 / d) * x_hi ** (1 / d) >= 0 or x_hi < 4:
        x_hi *= 2
    grid = np.geomspace(1.0, x_hi, 4001)
    vals = np.array([_k22_objective(x, d, alpha) for x in grid])
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = optimize.minimize_scalar(lambda x: -_k22_objective(x, d, alpha), bounds=(lo, hi),
                                   method="bounded", options={"xatol": 1e-10 * max(1.0, lo)})
    return max(float(vals[i]), float(-res.fun), _k22_objective(1.0, d, alpha))


@dataclass(frozen=True)
class ConstantLedger:
    """Constants of the small-lambda argument; log_* fields are natural logs."""

    dimension: int
    mu0: float
    eta: float
    k1: float
    log_k21: float
    log_k22: float
    log_k3: float
    k4: float
    k5: float
    k6: float
    j0: float
    j_neq: float
    k0: float = 1.0

    @property
    def log_k2(self) -> float:
        return max(self.log_k21, self.log_k22)

    @property
    def k2(self) -> float:
        return _exp(self.log_k2)

    @property
    def k3(self) -> float:
        return _exp(self.log_k3)

    @property
    def log_gamma(self) -> float:
        return -math.log(40 * math.e) - self.log_k3 - math.log(self.k6)

    @property
    def gamma(self) -> float:
        return _exp(self.log_gamma)

    @property
    def lambda_threshold_scaled(self) -> float:
        """4 gamma: admissible quartic coupling once K0 = 1."""
        return 4 * self.gamma

    @property
    def log_lambda_threshold(self) -> float:
        return math.log(4) + self.log_gamma - 4 * math.log(self.eta)

    @property
    def lambda_threshold(self) -> float:
        """4 gamma / eta^4: the same condition in the original units."""
        return _exp(self.log_lambda_threshold)

    def log_c1(self, N: int) -> float:
        j0, jn = self.j0, self.j_neq
        base = (math.log(80 * math.e) + self.log_k3 + math.log(self.k5) + math.log(self.k6)
                + 2 * math.log(j0) - 2 * math.log(jn) - 2 * math.log(j0 - jn))
        return _log_factorial(N) + N * base

    def log_c2(self) -> float:
        return (math.log(160 * math.e) + self.log_k3 + math.log(self.k4) + math.log(self.k6)
                + math.log(self.eta))

    def log_c3(self) -> float:
        return math.log(2) + self.log_c1(1) + 2 * self.log_c2()

    def as_dict(self) -> dict:
        return {
            "dimension": self.dimension, "mu0": self.mu0, "eta": self.eta, "K0": self.k0,
            "K1": self.k1, "log_K2": self.log_k2, "log_K3": self.log_k3, "K4": self.k4,
            "K5": self.k5, "K6": self.k6, "log_gamma": self.log_gamma,
            "log_lambda_threshold": self.log_lambda_threshold,
            "log_c2": self.log_c2(), "log_c3": self.log_c3(),
        }


def _exp(x: float) -> float:
    return math.exp(x) if x < 709.0 else math.inf


def _log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def constant_ledger(model: Model) -> ConstantLedger:
    """Ledger for a model; the K constants use its K0 = 1 rescaling (mu0 is unchanged)."""
    d = model.dimension
    scaled, eta = rescale_to_unit_k0(model)
    _, mu0 = decay_constants(scaled)
    k1 = l1_constant(d, mu0)
    lk21 = log_k21(d)
    lk22 = log_k22(d, mu0 / 5)
    lk2 = max(lk21, lk22)
    log_k3 = (16 * math.log(2) + 2 * math.log(3) + 10 + 0.5 * math.log(6)
              + 5 * math.log(k1) + 2.5 * lk2)
    k4 = 2 * math.e * math.sqrt(6 * k1)
    k5 = 2 ** 6 * 9 * math.e ** 4 * k1 ** 2
    k6 = l1_constant(d, mu0 / 2)
    return ConstantLedger(d, mu0, eta, k1, lk21, lk22, log_k3, k4, k5, k6, model.j0, model.j_neq)


@dataclass(frozen=True)
class Theorem45Report:
    n: int
    N: int
    lam: float
    lambda_threshold: float
    log_const4: float
    log_const5: float

    @property
    def log_rhs4(self) -> float:
        return self.log_const4 + self.N * _log(self.lam)

    @property
    def log_rhs5(self) -> float:
        return self.log_const5 + _log(self.lam)

    @property
    def certified(self) -> bool:
        return 0 < self.lam <= self.lambda_threshold

    @property
    def rhs4(self) -> float:
        return _scaled_power(self.log_const4, self.lam, self.N)

    @property
    def rhs5(self) -> float:
        return _scaled_power(self.log_const5, self.lam, 1)


def _scaled_power(log_const: float, lam: float, N: int) -> float:
    """exp(log_const) lam^N with the constant split as 2^k e^r.

    lam^N stays a separate factor and 2^k is applied with ldexp, so halving
    lam scales the result by exactly 2^-N even when the constant alone
    overflows a double.
    """
    k = math.floor(log_const / math.log(2))
    mant = math.exp(log_const - k * math.log(2)) * lam ** N
    if mant == 0 or not math.isfinite(mant):
        return _exp(log_const + N * _log(lam))
    try:
        return math.ldexp(mant, k)
    except OverflowError:
        return math.inf


def theorem45_rhs(model: Model, n: int, N: int, ledger: ConstantLedger | None = None) -> Theorem45Report:
    """c1(N) c2^n lam^N n! (l^1 bound) and c3 lam (two-point difference bound)."""
    if n < 2 or n % 2:
        raise InvalidNError("n must be even and at least 2", n=n)
    if N < 1 or n < 2 * (N + 1):
        raise InvalidNError("need N >= 1 and n >= 2(N+1)", n=n, N=N)
    ledger = ledger or constant_ledger(model)
    log4 = ledger.log_c1(N) + n * ledger.log_c2() + _log_factorial(n)
    return Theorem45Report(n, N, model.lam, ledger.lambda_threshold, log4, ledger.log_c3())


# -- zeta activities -------------------------------------------------------------------

@dataclass(frozen=True)
class ZetaActivity:
    polymer: tuple
    sources: tuple
    lam: float
    u: float
    order: int
    value: complex
    error: float


def _sub_covariance(C: np.ndarray, idx: Sequence[int]) -> np.ndarray:
    return np.asarray(C, dtype=complex)[np.ix_(list(idx), list(idx))]


def _integrate_terms(P: WeightedFieldPolynomial, A: np.ndarray, c: float, in_u: Sequence[bool],
                     extra_t: Sequence[int]) -> tuple[complex, float]:
    """Normalized int d mu (A^-1) of P, with t-averaged quartic weights on sites in U.

    ``extra_t[x]`` is the number of t_x factors inserted by the Taylor
    expansion in u; pulled weights contribute one more t_x each.
    """
    n = A.shape[0]
    norm = float(np.linalg.det(A).real) / math.pi ** n
    total, tail = 0j, 0.0
    for (m, ms, pl), coef in P.terms.items():
        q = [pl[x] + extra_t[x] for x in range(n)]
        weight = coef * math.prod((-c) ** pl[x] for x in range(n))

        def moment(x, p, q=q):
            a = float(A[x, x].real)
            if in_u[x]:
                return radial_moment_tavg(a, c, p, q[x])
            return radial_moment(a, 0.0, p)

        if n == 1:
            if m[0] == ms[0]:
                total += weight * moment(0, m[0] + ms[0])
        else:
            res = pair_integral(A, m, ms, moment, rtol=1e-14, ratio_cap=0.999)
            total += weight * res.value
            tail += abs(weight) * res.tail_bound
    return total * norm, tail * norm


def _raw_power(sources: Sequence[tuple[int, bool]], n: int) -> tuple[list[int], list[int]]:
    m, ms = [0] * n, [0] * n
    for x, star in sources:
        (ms if star else m)[x] += 1
    return m, ms


def zeta_activity(R: Sequence[Site], sources: Sequence[tuple[Site, bool]], lam: float, u: float,
                  M: int, C: np.ndarray, volume: Volume, h_order: int = H_ORDER) -> ZetaActivity:
    """M-th u-derivative of zeta~(R, I, u lam), evaluated deterministically.

    ``sources`` lists (site, is_star) for the field arguments psi^#(x_i); the
    covariance C is the one of the ambient volume and is restricted to R.
    The single h integral of a two-site tree uses Gauss-Legendre; the error
    combines the hopping-series tail with the change against a lower order.
    """
    R = tuple(map(tuple, R))
    if len(R) > 2:
        raise SizeLimitError("exact zeta activities need |R| <= 2", size=len(R))
    if M > ZETA_M_CAP or M < 0:
        raise SizeLimitError(f"derivative order capped at {ZETA_M_CAP}", M=M)
    local = {x: i for i, x in enumerate(R)}
    if any(tuple(s) not in local for s, _ in sources):
        return ZetaActivity(R, tuple(sources), lam, u, M, 0j, 0.0)
    src = [(local[tuple(s)], bool(star)) for s, star in sources]
    n = len(R)
    CR = _sub_covariance(C, [volume.index(x) for x in R])
    val, err = _zeta_value(CR, src, lam, u, M, h_order)
    if n == 2:
        val_lo, _ = _zeta_value(CR, src, lam, u, M, H_ORDER_CHECK)
        err += abs(val - val_lo)
    return ZetaActivity(R, tuple(sources), lam, u, M, complex(val), float(err))


def _zeta_value(CR: np.ndarray, src, lam: float, u: float, M: int, h_order: int) -> tuple[complex, float]:
    n = CR.shape[0]
    c = lam * u / 4
    m_src, ms_src = _raw_power(src, n)
    total, err = 0j, 0.0
    for usize in range(n + 1):
        for U in itertools.combinations(range(n), usize):
            if not (n >= 2 or usize >= 1 or src):
                continue
            in_u = [x in U for x in range(n)]
            weights = [c if in_u[x] else 0.0 for x in range(n)]
            for k in range(M + 1):
                if usize < M - k:
                    continue
                pref = (math.comb(M, k) * math.factorial(usize) / math.factorial(usize - M + k)
                        * u ** (usize - M + k) * (-lam / 4) ** (usize + k))
                if pref == 0:
                    continue
                for ys in itertools.product(U, repeat=k):
                    extra = [0] * n
                    for y in ys:
                        extra[y] += 1
                    m = [m_src[x] + 2 * (in_u[x] + extra[x]) for x in range(n)]
                    ms = [ms_src[x] + 2 * (in_u[x] + extra[x]) for x in range(n)]
                    P = WeightedFieldPolynomial.monomial(weights, m, ms)
                    v, e = _tree_integral(CR, P, c, in_u, extra, h_order)
                    total += pref * v
                    err += abs(pref) * e
    return total, err


def _tree_integral(CR: np.ndarray, P: WeightedFieldPolynomial, c: float, in_u, extra,
                   h_order: int) -> tuple[complex, float]:
    n = CR.shape[0]
    if n == 1:
        A = np.array([[1.0 / CR[0, 0].real]], dtype=complex)
        return _integrate_terms(P, A, c, in_u, extra)
    DP = apply_laplace_edge(LaplaceEdgeOp.from_covariance(CR, 0, 1), P)
    if not DP.terms:
        return 0j, 0.0
    g, w = np.polynomial.legendre.leggauss(h_order)
    total, err = 0j, 0.0
    for gi, wi in zip(0.5 * (g + 1), 0.5 * w):
        Ch = CR.copy()
        Ch[0, 1] *= gi
        Ch[1, 0] *= gi
        A = np.linalg.inv(Ch)
        A = 0.5 * (A + A.conj().T)
        v, e = _integrate_terms(DP, A, c, in_u, extra)
        total += wi * v
        err += wi * e
    return total, err


# -- partition identity -------------------------------------------------------------

def partition_function_bessel(jmat: np.ndarray, lam: float) -> float:
    """Normalized two-site Z~ = <exp(-lam/4 sum |psi|^4)> by angular reduction.

    det(J) 4 int int r1 r2 exp(-J00 r1^2 - J11 r2^2 - lam/4 (r1^4 + r2^4)) I0(2|J01| r1 r2).
    """
    a0, a1 = float(jmat[0, 0].real), float(jmat[1, 1].real)
    b = abs(jmat[0, 1])
    det = float(np.linalg.det(jmat).real)
    w = lam / 4

    def f(r2, r1):
        x = 2 * b * r1 * r2
        return r1 * r2 * i0e(x) * math.exp(x - a0 * r1 * r1 - a1 * r2 * r2 - w * (r1 ** 4 + r2 ** 4))

    # the exponent is bounded by -min_eig (r1^2 + r2^2)
    emin = float(np.linalg.eigvalsh(np.array([[a0, -b], [-b, a1]]))[0])
    top = math.sqrt(60.0 / emin)
    val, _ = integrate.dblquad(f, 0, top, 0, top, epsabs=1e-14, epsrel=1e-12)
    return 4 * det * val


def partition_function_mc(C: np.ndarray, lam: float, seed: int, count: int) -> Estimate:
    s1 = s2 = 0.0
    done, chunk = 0, 0
    while done < count:
        k = min(1_000_000, count - done)
        psi = sample_gaussian(C, seed, k, stream=chunk)
        w = np.exp(-lam / 4 * np.sum(np.abs(psi) ** 4, axis=1))
        s1 += float(w.sum())
        s2 += float(np.sum(w * w))
        done += k
        chunk += 1
    mean = s1 / count
    var = max(s2 / count - mean * mean, 0.0)
    return Estimate(mean, math.sqrt(var / count), "MC_REWEIGHT", count)


@dataclass(frozen=True)
class PartitionIdentity:
    lhs_quadrature: float
    lhs_mc: Estimate
    rhs: float
    rhs_error: float

    @property
    def residual_mc(self) -> float:
        return abs(self.lhs_mc.value - self.rhs)

    @property
    def residual_quadrature(self) -> float:
        return abs(self.lhs_quadrature - self.rhs)

    @property
    def within_3sigma(self) -> bool:
        return self.residual_mc <= 3 * self.lhs_mc.stderr + self.rhs_error


def partition_identity_check(model: Model, lam: float | None = None, *, seed: int = 0,
                             samples: int = 10 ** 6) -> PartitionIdentity:
    """Z~ on two sites against zeta0({1,2}) + zeta0({1}) zeta0({2}) with zeta0(single) = 1 + zeta~."""
    lam = model.lam if lam is None else lam
    volume = Volume.chain(2)
    jmat = build_j_matrix(model, volume)
    C = covariance_direct(jmat)
    z12 = zeta_activity(volume.sites, [], lam, 1.0, 0, C, volume)
    z1 = zeta_activity(volume.sites[:1], [], lam, 1.0, 0, C, volume)
    z2 = zeta_activity(volume.sites[1:], [], lam, 1.0, 0, C, volume)
    rhs = z12.value.real + (1 + z1.value.real) * (1 + z2.value.real)
    rhs_err = z12.error + z1.error + z2.error + 1e-12
    quad = partition_function_bessel(jmat, lam)
    mc = partition_function_mc(C, lam, seed, samples)
    return PartitionIdentity(quad, mc, rhs, rhs_err)


# -- single-polymer derivative bound -------------------------------------------------------

def derivative_bound_rhs(ledger: ConstantLedger, R: Sequence[Site], sources, lam: float, M: int) -> float:
    """(lam/4)^max(|R|-|I|, M) (2K3)^|R| K4^|I| (4K5)^M M!^2 prod c_I! ^1/2 sum_T e^{-mu0/2 |T|}."""
    R = [tuple(x) for x in R]
    nI = len(sources)
    counts: dict = {}
    for s, _ in sources:
        counts[tuple(s)] = counts.get(tuple(s), 0) + 1
    if len(R) == 1:
        tree = 1.0
    else:
        tree = math.exp(-ledger.mu0 / 2 * math.dist(R[0], R[1]))
    log_rhs = (max(len(R) - nI, M) * math.log(lam / 4) + len(R) * (math.log(2) + ledger.log_k3)
               + nI * math.log(ledger.k4) + M * math.log(4 * ledger.k5) + 2 * _log_factorial(M)
               + 0.5 * sum(_log_factorial(c) for c in counts.values()) + math.log(tree))
    return _exp(log_rhs)


@dataclass(frozen=True)
class DerivativeBoundCheck:
    lhs: float
    lhs_error: float
    rhs: float
    fd_value: float | None

    @property
    def holds(self) -> bool:
        return self.lhs - self.lhs_error <= self.rhs


def single_polymer_derivative_bound_check(model: Model, R: Sequence[Site], sources, u: float, M: int,
                                          volume: Volume) -> DerivativeBoundCheck:
    """Checks the bound for a model with K0 = 1; lhs from the exact derivative formula.

    For M = 1 a one-sided finite difference of the M = 0 activity in u is
    reported alongside as a consistency check.
    """
    ledger = constant_ledger(model)
    C = covariance_direct(build_j_matrix(model, volume))
    z = zeta_activity(R, sources, model.lam, u, M, C, volume)
    fd = None
    if M == 1:
        h = 1e-4
        u0, u1 = (u, u + h) if u + h <= 1 else (u - h, u)
        f1 = zeta_activity(R, sources, model.lam, u1, 0, C, volume).value
        f0 = zeta_activity(R, sources, model.lam, u0, 0, C, volume).value
        fd = abs((f1 - f0) / (u1 - u0))
    rhs = derivative_bound_rhs(ledger, R, sources, model.lam, M)
    return DerivativeBoundCheck(abs(z.value), z.error, rhs, fd)


def lambda_scaling_slope(model: Model, R: Sequence[Site], sources, M: int, volume: Volume,
                         lams: Sequence[float] = (1e-4, 1e-3)) -> float:
    """log-log slope of |d^M/du^M zeta~| at u = 1 between two small lambdas."""
    C = covariance_direct(build_j_matrix(model, volume))
    vals = [abs(zeta_activity(R, sources, lam, 1.0, M, C, volume).value) for lam in lams]
    return (math.log(vals[1]) - math.log(vals[0])) / (math.log(lams[1]) - math.log(lams[0]))
