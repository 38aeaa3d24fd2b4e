"""Brute-force moments and truncated correlations on tiny volumes.

Three evaluators share one interface:
  EXACT_GAUSSIAN  lambda = 0, Wick sums in exact Gaussian-rational arithmetic
  HOPPING_SERIES  two sites, deterministic series in the cross coupling
  MC_REWEIGHT     Gaussian samples reweighted by exp(-lambda/4 sum |psi|^4)

Sources are sequences of (site, is_star) pairs standing for psi(x) or psi*(x).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import mpmath
import numpy as np
from more_itertools import set_partitions

from .errors import ClusterBoundsError, SizeLimitError
from .estimates import JACKKNIFE_BLOCKS, Estimate, jackknife
from .gaussian import sample_gaussian
from .integrals import convergence_ratio, pair_integral, radial_moment, radial_moment_mp
from .model import Model, Site, Volume
from .propagator import build_j_matrix, covariance_direct

EXACT_GAUSSIAN = "EXACT_GAUSSIAN"
HOPPING_SERIES = "HOPPING_SERIES"
MC_REWEIGHT = "MC_REWEIGHT"
MC_VOLUME_CAP = 6
CUMULANT_CAP = 8
HOPPING_RATIO_CAP = 0.9
MP_DPS = 40

Source = tuple[Site, bool]
MomentKey = tuple[tuple[int, bool], ...]


class MissingMomentError(ClusterBoundsError):
    code = "MISSING_MOMENT"


@dataclass(frozen=True)
class CumulantEstimate:
    value: complex
    stderr: float
    method: str
    samples: int = 0

    def agrees_with(self, other: "CumulantEstimate", nsigma: float = 3.0, floor: float = 0.0) -> bool:
        err = math.hypot(self.stderr, other.stderr)
        return abs(complex(self.value) - complex(other.value)) <= nsigma * err + floor


def _key(volume: Volume, sources: Iterable[Source]) -> MomentKey:
    return tuple(sorted((volume.index(tuple(s)), bool(star)) for s, star in sources))


def _balanced(key: MomentKey) -> bool:
    return 2 * sum(star for _, star in key) == len(key)


# -- set partitions and cumulants ------------------------------------------------

def moments_to_cumulants(n: int, moment: Callable[[tuple[int, ...]], complex] | Mapping,
                         error: Callable[[tuple[int, ...]], float] | None = None) -> tuple[complex, float]:
    """kappa(X_1..X_n) = sum_pi (-1)^{|pi|-1} (|pi|-1)! prod_B <prod_{i in B} X_i>.

    ``moment`` is a callable or a mapping keyed by sorted index tuples; a
    missing entry raises MissingMomentError. With ``error`` the per-moment
    errors are propagated to first order.
    """
    if n > CUMULANT_CAP:
        raise SizeLimitError(f"cumulants capped at n = {CUMULANT_CAP}", n=n)
    lookup = moment.__getitem__ if isinstance(moment, Mapping) else moment

    def get(block: tuple[int, ...]):
        try:
            return lookup(block)
        except KeyError:
            raise MissingMomentError("moment not supplied", block=block) from None

    total, err = 0, 0.0
    for part in set_partitions(range(n)):
        k = len(part)
        coef = (-1) ** (k - 1) * math.factorial(k - 1)
        vals = [get(tuple(b)) for b in part]
        total = total + coef * math.prod(vals)
        if error is not None:
            for i, b in enumerate(part):
                others = math.prod(abs(complex(v)) for j, v in enumerate(vals) if j != i)
                err += abs(coef) * error(tuple(b)) * others
    return total, err


# -- exact Gaussian --------------------------------------------------------------------

def _gaussian_rational(z: complex):
    from sympy.polys.domains import QQ_I

    z = complex(z)
    return QQ_I(Fraction(z.real), Fraction(z.imag))


def _exact_wick(Cq, key: MomentKey):
    xs = [x for x, star in key if not star]
    ys = [y for y, star in key if star]
    if len(xs) != len(ys):
        return 0
    total = 0
    for perm in itertools.permutations(range(len(xs))):
        term = 1
        for i, j in enumerate(perm):
            term = term * Cq[xs[j]][ys[i]]
        total = total + term
    return total


def _to_complex(q) -> complex:
    if q == 0:
        return 0j
    return complex(float(Fraction(int(q.x.numerator), int(q.x.denominator))),
                   float(Fraction(int(q.y.numerator), int(q.y.denominator))))


def cumulant_exact_gaussian(C: np.ndarray, keys: Sequence[tuple[int, bool]]) -> complex:
    """Truncated correlation at lambda = 0 in exact arithmetic on the stored covariance."""
    n = C.shape[0]
    Cq = [[_gaussian_rational(C[i, j]) for j in range(n)] for i in range(n)]
    keys = list(keys)
    cache: dict = {}

    def moment(idx):
        k = tuple(sorted(keys[i] for i in idx))
        if k not in cache:
            cache[k] = _exact_wick(Cq, k)
        return cache[k]

    value, _ = moments_to_cumulants(len(keys), moment)
    return _to_complex(value) if value != 0 else 0j


# -- hopping series -------------------------------------------------------------------

class HoppingMoments:
    """Normalized moments on two sites from the hopping series.

    With ``precision='mp'`` the radial moments come from mpmath so that
    differences in lambda stay clean well below double precision.
    """

    def __init__(self, jmat: np.ndarray, lam, precision: str = "float", ratio_cap: float = HOPPING_RATIO_CAP):
        self.A = np.asarray(jmat, dtype=complex)
        if self.A.shape != (2, 2):
            raise SizeLimitError("hopping series needs exactly two sites", n=self.A.shape[0])
        self.lam = lam
        self.mp = precision == "mp"
        self.ratio_cap = ratio_cap
        self.rtol = 1e-32 if self.mp else 1e-15
        self._z = None
        self._cache: dict = {}

    def _site_moment(self, i: int, p: int):
        a = float(self.A[i, i].real)
        if self.mp:
            return radial_moment_mp(a, mpmath.mpf(self.lam) / 4, p, MP_DPS)
        return radial_moment(a, float(self.lam) / 4, p)

    def _raw(self, m, ms):
        if self.mp:
            with mpmath.workdps(MP_DPS):
                return pair_integral(self.A, m, ms, self._site_moment, rtol=self.rtol,
                                     ratio_cap=self.ratio_cap)
        return pair_integral(self.A, m, ms, self._site_moment, rtol=self.rtol, ratio_cap=self.ratio_cap)

    @property
    def partition(self):
        if self._z is None:
            self._z = self._raw((0, 0), (0, 0))
        return self._z

    def moment(self, key: MomentKey):
        if key not in self._cache:
            m, ms = [0, 0], [0, 0]
            for x, star in key:
                (ms if star else m)[x] += 1
            if sum(m) != sum(ms):
                self._cache[key] = (0, 0.0)
            else:
                z = self.partition
                r = self._raw(m, ms)
                val = r.value / z.value
                err = (r.tail_bound + abs(complex(val)) * z.tail_bound) / abs(complex(z.value))
                self._cache[key] = (val, float(err))
        return self._cache[key]


def moments_hopping(model: Model, volume: Volume, sources: Sequence[Source],
                    precision: str = "float") -> Estimate:
    """<prod psi^#> on a two-site volume by the hopping series; stderr is the rigorous tail bound."""
    jmat = build_j_matrix(model, volume)
    hm = HoppingMoments(jmat, model.lam, precision)
    val, err = hm.moment(_key(volume, sources))
    return Estimate(complex(val), err, HOPPING_SERIES)


def hopping_applicable(model: Model, volume: Volume) -> bool:
    if len(volume) != 2:
        return False
    return convergence_ratio(build_j_matrix(model, volume)) < HOPPING_RATIO_CAP


# -- Monte Carlo ---------------------------------------------------------------------

def _mc_block_means(C: np.ndarray, lam: float, keys: Sequence[MomentKey], seed: int, count: int,
                    blocks: int = JACKKNIFE_BLOCKS) -> tuple[np.ndarray, np.ndarray]:
    """Per-block means of w and of w * monomial for every key (shape blocks x len(keys))."""
    if count < blocks:
        raise ValueError("need at least one sample per block")
    edges = np.linspace(0, count, blocks + 1).astype(int)
    w_means = np.empty(blocks)
    mono_means = np.empty((blocks, len(keys)), dtype=complex)
    order = sorted(range(len(keys)), key=lambda i: keys[i])
    for b in range(blocks):
        k = int(edges[b + 1] - edges[b])
        psi = sample_gaussian(C, seed, k, stream=b)
        w = np.exp(-lam / 4 * np.sum(np.abs(psi) ** 4, axis=1))
        w_means[b] = w.mean()
        factors = {(x, False): psi[:, x] for x in range(psi.shape[1])}
        factors.update({(x, True): psi[:, x].conj() for x in range(psi.shape[1])})
        # prefix products shared between sorted keys
        stack: list[tuple[MomentKey, np.ndarray]] = [((), w.astype(complex))]
        for i in order:
            key = keys[i]
            while not (len(stack[-1][0]) <= len(key) and key[:len(stack[-1][0])] == stack[-1][0]):
                stack.pop()
            while len(stack[-1][0]) < len(key):
                pre, val = stack[-1]
                nxt = key[:len(pre) + 1]
                stack.append((nxt, val * factors[nxt[-1]]))
            mono_means[b, i] = stack[-1][1].mean()
    return w_means, mono_means


def moments_mc(model: Model, volume: Volume, sources: Sequence[Source], seed: int = 0,
               count: int = 10 ** 6) -> Estimate:
    """Reweighted Gaussian estimate of <prod psi^#>; ratio stderr by 50-block jackknife."""
    if len(volume) > MC_VOLUME_CAP:
        raise SizeLimitError(f"Monte Carlo oracle capped at {MC_VOLUME_CAP} sites", size=len(volume))
    C = covariance_direct(build_j_matrix(model, volume))
    key = _key(volume, sources)
    w, mono = _mc_block_means(C, model.lam, [key], seed, count)
    val, err = jackknife(lambda wm, mm: mm[0] / wm, [w, mono])
    return Estimate(val, err, MC_REWEIGHT, count)


# -- cumulant front end ---------------------------------------------------------------

def _choose_method(model: Model, volume: Volume, method: str) -> str:
    if method != "auto":
        return method
    if model.lam == 0:
        return EXACT_GAUSSIAN
    if hopping_applicable(model, volume):
        return HOPPING_SERIES
    return MC_REWEIGHT


def cumulants(model: Model, volume: Volume, source_lists: Sequence[Sequence[Source]], *,
              method: str = "auto", seed: int = 0, samples: int = 10 ** 6,
              precision: str = "float", phase_symmetry: bool = True) -> list[CumulantEstimate]:
    """Truncated correlations for several source lists sharing one evaluator.

    With ``phase_symmetry`` the Monte Carlo path sets moments with unequal
    psi/psi* counts to their exact value 0 instead of estimating them.
    """
    method = _choose_method(model, volume, method)
    if method == EXACT_GAUSSIAN:
        if model.lam != 0:
            raise ValueError("exact Gaussian evaluation requires lambda = 0")
        C = covariance_direct(build_j_matrix(model, volume))
        return [CumulantEstimate(cumulant_exact_gaussian(C, [_key(volume, [s])[0] for s in srcs]), 0.0,
                                 EXACT_GAUSSIAN) for srcs in source_lists]
    if method == HOPPING_SERIES:
        hm = HoppingMoments(build_j_matrix(model, volume), model.lam, precision)
        out = []
        for srcs in source_lists:
            keys = [_key(volume, [s])[0] for s in srcs]
            val, err = moments_to_cumulants(
                len(keys),
                lambda idx: hm.moment(tuple(sorted(keys[i] for i in idx)))[0],
                lambda idx: hm.moment(tuple(sorted(keys[i] for i in idx)))[1])
            out.append(CumulantEstimate(val if hm.mp else complex(val), err, HOPPING_SERIES))
        return out
    if method != MC_REWEIGHT:
        raise ValueError(f"unknown method {method!r}")
    if len(volume) > MC_VOLUME_CAP:
        raise SizeLimitError(f"Monte Carlo oracle capped at {MC_VOLUME_CAP} sites", size=len(volume))
    C = covariance_direct(build_j_matrix(model, volume))
    per_list = [[_key(volume, [s])[0] for s in srcs] for srcs in source_lists]
    needed: set = set()
    for keys in per_list:
        n = len(keys)
        for r in range(1, n + 1):
            for idx in itertools.combinations(range(n), r):
                k = tuple(sorted(keys[i] for i in idx))
                if not phase_symmetry or _balanced(k):
                    needed.add(k)
    needed_list = sorted(needed)
    pos = {k: i for i, k in enumerate(needed_list)}
    w, mono = _mc_block_means(C, model.lam, needed_list, seed, samples)
    out = []
    for keys in per_list:
        def f(wm, mm, keys=keys):
            def moment(idx):
                k = tuple(sorted(keys[i] for i in idx))
                return mm[pos[k]] / wm if k in pos else 0.0
            return moments_to_cumulants(len(keys), moment)[0]

        val, err = jackknife(f, [w, mono])
        out.append(CumulantEstimate(val, err, MC_REWEIGHT, samples))
    return out


def cumulant(model: Model, volume: Volume, sources: Sequence[Source], **kw) -> CumulantEstimate:
    return cumulants(model, volume, [sources], **kw)[0]


# -- l^1 sums and checks -------------------------------------------------------------

def default_sharps(n: int) -> tuple[bool, ...]:
    """psi, psi*, psi, psi*, ... (first argument a psi)."""
    return tuple(bool(i % 2) for i in range(n))


@dataclass(frozen=True)
class L1Sum:
    value: float
    error: float
    method: str
    terms: int


def l1_cluster_sum(model: Model, volume: Volume, n: int, sharps: Sequence[bool] | None = None,
                   **kw) -> L1Sum:
    """sum over x_2..x_n in the volume of |<psi^#(0), psi^#(x_2), ...>^T| with x_1 = 0.

    Errors of the individual cumulants are added, which is conservative.
    """
    if len(volume) > 3 or n > 6:
        raise SizeLimitError("l1 sums limited to |volume| <= 3 and n <= 6", size=len(volume), n=n)
    sharps = tuple(sharps) if sharps is not None else default_sharps(n)
    origin = (0,) * volume.dimension
    if not volume.contains_origin:
        raise ValueError("volume must contain the origin")
    if 2 * sum(sharps) != n:
        return L1Sum(0.0, 0.0, "PHASE_SYMMETRY", 0)
    lists = [[(origin, sharps[0])] + [(x, s) for x, s in zip(rest, sharps[1:])]
             for rest in itertools.product(volume.sites, repeat=n - 1)]
    ests = cumulants(model, volume, lists, **kw)
    value = float(sum(abs(complex(e.value)) for e in ests))
    err = float(sum(e.stderr for e in ests))
    return L1Sum(value, err, ests[0].method, len(ests))


@dataclass(frozen=True)
class DerivativeCheck:
    derivative: float
    scale: float
    relative: float
    order: int


def lambda_derivative_check(model: Model, volume: Volume, sources: Sequence[Source], k: int,
                            h: float = 1e-3) -> DerivativeCheck:
    """k-th lambda derivative of a cumulant at lambda = 0 for k in {0, 1}.

    Cumulants only exist for lambda >= 0, so one-sided differences with one
    Richardson step replace central ones; the value at 0 is the exact
    Gaussian one. ``scale`` estimates the first order that is allowed to be
    nonzero (k = 2), and ``relative`` = |derivative| / scale.
    """
    if k not in (0, 1):
        raise ValueError("k must be 0 or 1")
    if not hopping_applicable(model, volume):
        raise SizeLimitError("derivative check needs the two-site hopping oracle")
    jmat = build_j_matrix(model, volume)
    keys = [_key(volume, [s])[0] for s in sources]

    def kappa(lam):
        hm = HoppingMoments(jmat, mpmath.mpf(lam), "mp")
        with mpmath.workdps(MP_DPS):
            v, _ = moments_to_cumulants(len(keys), lambda idx: hm.moment(tuple(sorted(keys[i] for i in idx)))[0])
            return mpmath.mpc(v)

    C = covariance_direct(jmat)
    f0 = mpmath.mpc(cumulant_exact_gaussian(C, keys))
    with mpmath.workdps(MP_DPS):
        h = mpmath.mpf(h)
        fh, fh2, fh4 = kappa(h) - f0, kappa(h / 2) - f0, kappa(h / 4) - f0
        d1 = lambda a, s: a / s
        # first derivative, Richardson on the one-sided quotient
        D_h, D_h2 = d1(fh, h), d1(fh2, h / 2)
        first = 2 * D_h2 - D_h
        # second derivative from the same samples: f(s) ~ f'(0) s + f''(0) s^2/2
        S_h = 2 * (fh - first * h) / h ** 2
        S_h2 = 2 * (fh2 - first * h / 2) / (h / 2) ** 2
        second = 2 * S_h2 - S_h
        if k == 0:
            deriv = abs(f0)
        else:
            deriv = abs(first)
        scale = abs(second)
        rel = deriv / scale if scale != 0 else (0.0 if deriv == 0 else math.inf)
        return DerivativeCheck(float(deriv), float(scale), float(rel), k)


@dataclass(frozen=True)
class TwoPointDifference:
    value: float
    error: float
    half_value: float
    slope_ratio: float


def twopoint_difference_check(model: Model, volume: Volume, lam: float | None = None, **kw) -> TwoPointDifference:
    """sum_x |<psi(0) psi*(x)>_lam - C(0, x)| at lam and lam/2; slope_ratio = D(lam)/D(lam/2)."""
    lam = model.lam if lam is None else lam
    origin = (0,) * volume.dimension
    C = covariance_direct(build_j_matrix(model, volume))
    i0 = volume.index(origin)
    lists = [[(origin, False), (x, True)] for x in volume.sites]

    def diff(l):
        if l == 0:
            return 0.0, 0.0
        ests = cumulants(model.with_lambda(l), volume, lists, **kw)
        v = sum(abs(complex(e.value) - C[i0, volume.index(x)]) for e, x in zip(ests, volume.sites))
        return float(v), float(sum(e.stderr for e in ests))

    v, e = diff(lam)
    v2, _ = diff(lam / 2)
    return TwoPointDifference(v, e, v2, v / v2 if v2 else math.nan)


def rescaling_check(model: Model, volume: Volume, sources: Sequence[Source], eta: float,
                    **kw) -> tuple[CumulantEstimate, CumulantEstimate, float]:
    """Cumulant of the model with coupling eta^2 J and quartic eta^4 lambda, the original, and eta^-n.

    Substituting psi = phi / eta maps one measure to the other, so the first
    equals eta^-n times the second.
    """
    scaled = model.scaled(eta * eta).with_lambda(model.lam * eta ** 4)
    a = cumulant(scaled, volume, sources, **kw)
    b = cumulant(model, volume, sources, **kw)
    return a, b, eta ** -len(sources)
