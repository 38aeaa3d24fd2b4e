"""Free propagator C = J~^{-1} on a finite volume and its certified decay.

J~(x, y) = J(x - y) with rows indexed by the first argument, so that
<psi(x) psi*(y)> = C(x, y) for the Gaussian part of the measure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
from scipy.special import gammaln

from .errors import NotPositiveDefiniteError
from .model import Model, Volume

HERMITIAN_TOL = 1e-12


def build_j_matrix(model: Model, volume: Volume) -> np.ndarray:
    sites = np.array(volume.sites)
    n = len(volume)
    jmat = np.empty((n, n), dtype=complex)
    for i in range(n):
        for k in range(n):
            jmat[i, k] = model.J(tuple(sites[i] - sites[k]))
    if np.max(np.abs(jmat - jmat.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise ValueError("coupling matrix is not Hermitian")
    return jmat


def covariance_direct(jmat: np.ndarray) -> np.ndarray:
    """Inverse by Cholesky factorization plus one step of residual refinement."""
    n = jmat.shape[0]
    try:
        factor = scipy.linalg.cho_factor(jmat, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("J~ is not positive definite") from exc
    eye = np.eye(n, dtype=complex)
    cov = scipy.linalg.cho_solve(factor, eye)
    cov = cov + scipy.linalg.cho_solve(factor, eye - jmat @ cov)
    return 0.5 * (cov + cov.conj().T)


def covariance_neumann(model: Model, volume: Volume, p_max: int) -> tuple[np.ndarray, float]:
    """Random-path (Neumann) series truncated at order p_max, with its max-entry error bound."""
    jmat = build_j_matrix(model, volume)
    j0 = model.j0
    off = jmat - np.diag(np.diag(jmat))
    step = -off / j0
    term = np.eye(len(volume), dtype=complex)
    total = term.copy()
    for _ in range(p_max):
        term = term @ step
        total += term
    ratio = model.j_neq / j0
    err = ratio ** (p_max + 1) / (1.0 - ratio) / j0
    return total / j0, err


def decay_constants(model: Model) -> tuple[float, float]:
    """(K0, mu0) with |C(x,y)| <= K0 exp(-mu0 |x-y|)."""
    j0, jn = model.j0, model.j_neq
    k0 = j0 / (jn * (j0 - jn))
    mu0 = math.log(j0 / jn) / model.r0
    return k0, mu0


@dataclass(frozen=True)
class Covariance:
    matrix: np.ndarray
    volume: Volume
    k0: float
    mu0: float

    @property
    def k1(self) -> float:
        return l1_constant(self.volume.dimension, self.mu0)


def make_covariance(model: Model, volume: Volume) -> Covariance:
    k0, mu0 = decay_constants(model)
    return Covariance(covariance_direct(build_j_matrix(model, volume)), volume, k0, mu0)


@dataclass(frozen=True)
class DecayReport:
    max_ratio: float
    worst_pair: tuple[int, int]

    @property
    def holds(self) -> bool:
        return self.max_ratio <= 1.0 + 1e-9


def verify_decay(cov: Covariance) -> DecayReport:
    """Largest |C(x,y)| e^{mu0 |x-y|} / K0 over all pairs."""
    sites = np.array(cov.volume.sites, dtype=float)
    dist = np.linalg.norm(sites[:, None, :] - sites[None, :, :], axis=-1)
    ratio = np.abs(cov.matrix) * np.exp(cov.mu0 * dist) / cov.k0
    idx = np.unravel_index(np.argmax(ratio), ratio.shape)
    return DecayReport(float(ratio[idx]), (int(idx[0]), int(idx[1])))


def min_eigenvalue(jmat: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(jmat)[0])


def _sum_of_squares_counts(d: int, nmax: int) -> np.ndarray:
    """r_d(n) = #{z in Z^d : |z|^2 = n} for n <= nmax."""
    r = int(math.isqrt(nmax))
    one = np.zeros(nmax + 1, dtype=np.int64)
    one[np.arange(r + 1) ** 2] = 2
    one[0] = 1
    out = one.copy()
    for _ in range(d - 1):
        nxt = np.zeros_like(out)
        for j in range(r + 1):
            sq = j * j
            mult = 1 if j == 0 else 2
            nxt[sq:] += mult * out[: nmax + 1 - sq]
        out = nxt
    return out


def _ball_tail_bound(d: int, mu: float, radius: int) -> float:
    """Bound on sum_{|z| > radius} e^{-mu |z|}.

    Lattice points with k < |z| <= k+1 number at most the volume of the ball
    of radius k+1+sqrt(d)/2, and each contributes at most e^{-mu k}.
    """
    vd = math.pi ** (d / 2) / math.exp(gammaln(d / 2 + 1))
    c = math.sqrt(d) / 2

    def term(k):
        return vd * (k + 1 + c) ** d * math.exp(-mu * k)

    q = ((radius + 2 + c) / (radius + 1 + c)) ** d * math.exp(-mu)
    if q >= 1:
        return math.inf
    return term(radius) / (1 - q)


@lru_cache(maxsize=256)
def l1_constant(d: int, mu: float, rel_tail: float = 1e-9) -> float:
    """Certified upper bound on K1(d, mu) = sum_{z in Z^d} e^{-mu |z|}."""
    if mu <= 0:
        return math.inf
    radius = max(4, int(math.ceil((d * 4 + math.log(1 / rel_tail)) / mu)))
    while True:
        nmax = radius * radius
        counts = _sum_of_squares_counts(d, nmax)
        n = np.nonzero(counts)[0]
        partial = float(np.sum(counts[n] * np.exp(-mu * np.sqrt(n))))
        tail = _ball_tail_bound(d, mu, radius)
        if tail <= rel_tail * partial:
            # relative slack covers rounding in the float partial sum
            return (partial + tail) * (1 + 1e-13)
        radius = int(radius * 1.5) + 1
        if radius > 20000:
            return partial + tail
