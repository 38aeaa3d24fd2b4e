"""Complex Gaussian measures: Wick moments, interpolated covariances, sampling,
and field polynomials times quartic weights (closed under Laplace edge operators).
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import NotPositiveDefiniteError, SizeLimitError
from .estimates import Estimate
from .integrals import pair_integral, radial_moment

WICK_CAP = 9
MC_CHUNK = 200_000


def wick_moment(C: np.ndarray, xs: Sequence[int], ys: Sequence[int]) -> complex:
    """<psi(x_1)..psi(x_p) psi*(y_1)..psi*(y_q)> = sum_{gamma in S_p} prod_i C(x_gamma(i), y_i)."""
    p = len(xs)
    if p != len(ys):
        return 0j
    if p == 0:
        return 1 + 0j
    if p > WICK_CAP:
        raise SizeLimitError(f"Wick enumeration capped at {WICK_CAP} pairs", p=p)
    block = np.asarray(C)[np.ix_(list(xs), list(ys))]
    total = 0j
    cols = range(p)
    for perm in itertools.permutations(range(p)):
        total += np.prod(block[perm, cols])
    return complex(total)


def interpolation_matrix(n: int, s: Mapping[tuple[int, int], float]) -> np.ndarray:
    """Symmetric matrix of pair parameters with ones on the diagonal."""
    out = np.ones((n, n))
    for (a, b), v in s.items():
        out[a, b] = out[b, a] = v
    return out


def interpolated_covariance(C: np.ndarray, s) -> np.ndarray:
    """C[s]: off-diagonal entries multiplied by s, diagonal kept."""
    C = np.asarray(C)
    smat = s if isinstance(s, np.ndarray) else interpolation_matrix(C.shape[0], s)
    out = C * smat
    np.fill_diagonal(out, np.diag(C))
    return out


def hermitian_sqrt(C: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(C)
    if vals[0] <= 0:
        raise NotPositiveDefiniteError("covariance is not positive definite", min_eig=float(vals[0]))
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def rng_for(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by (seed, stream) so workers are reproducible."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(stream,))))


def sample_gaussian(C: np.ndarray, seed: int, count: int, stream: int = 0) -> np.ndarray:
    """Samples psi (rows) with <psi(x) psi*(y)> = C(x, y) and <psi psi> = 0."""
    root = hermitian_sqrt(np.asarray(C, dtype=complex))
    rng = rng_for(seed, stream)
    n = root.shape[0]
    xi = (rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))) / math.sqrt(2)
    return xi @ root.T


# -- weighted field polynomials ------------------------------------------------

Key = tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]


def _bump(t: tuple[int, ...], i: int, by: int) -> tuple[int, ...]:
    return t[:i] + (t[i] + by,) + t[i + 1:]


@dataclass(frozen=True)
class WeightedFieldPolynomial:
    """sum_k c_k prod_x (-w_x)^{pull_k(x)} psi^{m_k(x)} psi*^{m*_k(x)}  x  exp(-sum_x w_x |psi(x)|^4).

    ``terms`` maps (m, m*, pulls) to the combinatorial coefficient c_k; the
    weight powers pulled out by differentiating the exponential are kept
    separate so callers can integrate them against t-dependent weights.
    """

    weights: tuple[float, ...]
    terms: Mapping[Key, complex] = field(default_factory=dict)

    @classmethod
    def monomial(cls, weights: Sequence[float], m: Sequence[int], mstar: Sequence[int],
                 coeff: complex = 1.0) -> "WeightedFieldPolynomial":
        n = len(weights)
        return cls(tuple(float(w) for w in weights), {(tuple(m), tuple(mstar), (0,) * n): complex(coeff)})

    @classmethod
    def from_sources(cls, weights: Sequence[float], psi_sites: Iterable[int],
                     psibar_sites: Iterable[int]) -> "WeightedFieldPolynomial":
        n = len(weights)
        m, ms = [0] * n, [0] * n
        for x in psi_sites:
            m[x] += 1
        for x in psibar_sites:
            ms[x] += 1
        return cls.monomial(weights, m, ms)

    @property
    def n_sites(self) -> int:
        return len(self.weights)

    def _new(self, terms: dict) -> "WeightedFieldPolynomial":
        return WeightedFieldPolynomial(self.weights, {k: v for k, v in terms.items() if v != 0})

    def __add__(self, other: "WeightedFieldPolynomial") -> "WeightedFieldPolynomial":
        if other.weights != self.weights:
            raise ValueError("weights differ")
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return self._new(out)

    def scale(self, c: complex) -> "WeightedFieldPolynomial":
        return self._new({k: v * c for k, v in self.terms.items()})

    def times_monomial(self, m: Sequence[int], mstar: Sequence[int]) -> "WeightedFieldPolynomial":
        out = {}
        for (a, b, pl), v in self.terms.items():
            key = (tuple(x + y for x, y in zip(a, m)), tuple(x + y for x, y in zip(b, mstar)), pl)
            out[key] = out.get(key, 0) + v
        return self._new(out)

    def d_psi(self, x: int) -> "WeightedFieldPolynomial":
        """d/d psi(x); the weight contributes -w_x * 2 psi(x) psi*(x)^2."""
        out: dict = {}
        for (m, ms, pl), v in self.terms.items():
            if m[x]:
                k = (_bump(m, x, -1), ms, pl)
                out[k] = out.get(k, 0) + v * m[x]
            if self.weights[x] != 0:
                k = (_bump(m, x, 1), _bump(ms, x, 2), _bump(pl, x, 1))
                out[k] = out.get(k, 0) + 2 * v
        return self._new(out)

    def d_psibar(self, x: int) -> "WeightedFieldPolynomial":
        out: dict = {}
        for (m, ms, pl), v in self.terms.items():
            if ms[x]:
                k = (m, _bump(ms, x, -1), pl)
                out[k] = out.get(k, 0) + v * ms[x]
            if self.weights[x] != 0:
                k = (_bump(m, x, 2), _bump(ms, x, 1), _bump(pl, x, 1))
                out[k] = out.get(k, 0) + 2 * v
        return self._new(out)

    def coefficient(self, key: Key) -> complex:
        """c_k times its pulled weight factors."""
        m, ms, pl = key
        return self.terms[key] * math.prod((-w) ** p for w, p in zip(self.weights, pl))

    def evaluate(self, psi: np.ndarray) -> np.ndarray:
        """Numeric integrand at field points psi of shape (..., n_sites)."""
        psi = np.asarray(psi, dtype=complex)
        conj = psi.conj()
        total = np.zeros(psi.shape[:-1], dtype=complex)
        for key in self.terms:
            m, ms, _ = key
            val = np.full(psi.shape[:-1], self.coefficient(key), dtype=complex)
            for x in range(self.n_sites):
                if m[x]:
                    val = val * psi[..., x] ** m[x]
                if ms[x]:
                    val = val * conj[..., x] ** ms[x]
            total += val
        w = np.asarray(self.weights)
        return total * np.exp(-np.sum(w * np.abs(psi) ** 4, axis=-1))


@dataclass(frozen=True)
class LaplaceEdgeOp:
    """Delta_xy = C(x,y) d_psi(x) d_psi*(y) + C(y,x) d_psi(y) d_psi*(x)."""

    x: int
    y: int
    cxy: complex
    cyx: complex

    def __post_init__(self):
        if self.x == self.y:
            raise ValueError("edge operator needs two distinct sites")

    @classmethod
    def from_covariance(cls, C: np.ndarray, x: int, y: int) -> "LaplaceEdgeOp":
        return cls(x, y, complex(C[x, y]), complex(C[y, x]))


def apply_laplace_edge(op: LaplaceEdgeOp, P: WeightedFieldPolynomial) -> WeightedFieldPolynomial:
    first = P.d_psibar(op.y).d_psi(op.x).scale(op.cxy)
    second = P.d_psibar(op.x).d_psi(op.y).scale(op.cyx)
    return first + second


def polynomial_wick(C: np.ndarray, P: WeightedFieldPolynomial) -> complex:
    """Gaussian expectation of the polynomial part (weights ignored)."""
    total = 0j
    for key in P.terms:
        m, ms, _ = key
        xs = [x for x in range(P.n_sites) for _ in range(m[x])]
        ys = [x for x in range(P.n_sites) for _ in range(ms[x])]
        total += P.coefficient(key) * wick_moment(C, xs, ys)
    return total


def gaussian_expectation_weighted(C: np.ndarray, P: WeightedFieldPolynomial, *, seed: int = 0,
                                  count: int = 1_000_000, stream: int = 0) -> Estimate:
    """int d mu_C  P, exact by Wick when all weights vanish, Monte Carlo otherwise."""
    if not any(P.weights):
        return Estimate(polynomial_wick(C, P), 0.0, "EXACT_GAUSSIAN")
    s1 = 0j
    s2 = 0.0
    done = 0
    chunk_id = 0
    while done < count:
        k = min(MC_CHUNK, count - done)
        psi = sample_gaussian(C, seed, k, stream=stream * 100_003 + chunk_id)
        vals = P.evaluate(psi)
        s1 += vals.sum()
        s2 += float(np.sum(np.abs(vals) ** 2))
        done += k
        chunk_id += 1
    mean = s1 / count
    var = max(s2 / count - abs(mean) ** 2, 0.0)
    return Estimate(complex(mean), math.sqrt(var / count), "MC_REWEIGHT", count)


def gaussian_expectation_quadrature(C: np.ndarray, P: WeightedFieldPolynomial) -> Estimate:
    """Deterministic evaluation on one or two sites (hopping expansion of the cross term)."""
    C = np.asarray(C, dtype=complex)
    n = C.shape[0]
    if n > 2:
        raise SizeLimitError("quadrature evaluation handles at most two sites", n=n)
    A = np.linalg.inv(C)
    A = 0.5 * (A + A.conj().T)
    norm = np.linalg.det(A).real / math.pi ** n
    a = [A[i, i].real for i in range(n)]
    total, tail = 0j, 0.0
    for key in P.terms:
        m, ms, _ = key
        coef = P.coefficient(key)

        def moment(i, p):
            return radial_moment(a[i], P.weights[i], p)

        if n == 1:
            val = moment(0, m[0] + ms[0]) if m[0] == ms[0] else 0.0
            total += coef * val
        else:
            res = pair_integral(A, m, ms, moment)
            total += coef * res.value
            tail += abs(coef) * res.tail_bound
    return Estimate(complex(total * norm), float(tail * norm), "QUADRATURE")


def local_factorial_check(C: np.ndarray, zs: Sequence[int], ws: Sequence[int],
                          k1: float) -> tuple[float, float, bool]:
    """|<psi(z_1)..psi(z_q) psi*(w_1)..psi*(w_q)>| <= K1^q prod_x n*(x)! (n* counts the w's).

    Valid for covariances normalized to K0 = 1; pass C / K0 otherwise.
    """
    lhs = abs(wick_moment(C, zs, ws))
    rhs = k1 ** len(ws) * math.prod(math.factorial(c) for c in Counter(ws).values())
    return lhs, rhs, lhs <= rhs * (1 + 1e-12)
