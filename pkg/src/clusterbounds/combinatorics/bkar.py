"""Forest interpolation formula and its tree corollaries.

For f a function of the pair variables s_l, l in E^(2),

    f(1) = sum_F int_{[0,1]^F} dh  (prod_{l in F} d/ds_l) f (s(F, h)).

Polynomials are integrated exactly: ordering the h of a forest splits the
cube into simplices, on which every path minimum is a single h variable.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .graphs import Edge, all_pairs, enumerate_forests, enumerate_spanning_trees, forest_path, is_connected

# polynomial in pair variables: exponent tuple (ordered like all_pairs(n)) -> coefficient
Poly = dict[tuple[int, ...], Fraction]


def random_polynomial(rng: np.random.Generator, n: int, terms: int = 4, max_deg: int = 2) -> Poly:
    L = len(all_pairs(n))
    out: Poly = {}
    for _ in range(terms):
        exps = tuple(int(e) for e in rng.integers(0, max_deg + 1, size=L))
        coef = Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 10)))
        out[exps] = out.get(exps, Fraction(0)) + coef
    return out


def evaluate_at_ones(poly: Poly) -> Fraction:
    return sum(poly.values(), Fraction(0))


def differentiate(poly: Poly, var: int) -> Poly:
    out: Poly = {}
    for exps, c in poly.items():
        k = exps[var]
        if k:
            new = exps[:var] + (k - 1,) + exps[var + 1:]
            out[new] = out.get(new, Fraction(0)) + c * k
    return out


def _simplex_monomial(powers: list[int]) -> Fraction:
    """int_{0<x_1<...<x_k<1} prod x_j^{a_j} dx = prod_j 1/(a_1+...+a_j + j)."""
    out = Fraction(1)
    acc = 0
    for j, a in enumerate(powers, start=1):
        acc += a
        out /= acc + j
    return out


def _forest_term(poly: Poly, n: int, forest: frozenset[Edge]) -> Fraction:
    pairs = all_pairs(n)
    pos = {e: i for i, e in enumerate(pairs)}
    d = poly
    for e in forest:
        d = differentiate(d, pos[e])
    if not d:
        return Fraction(0)
    fedges = sorted(forest)
    if not fedges:
        # every s vanishes at the empty forest
        return sum((c for exps, c in d.items() if not any(exps)), Fraction(0))
    paths = {l: forest_path(fedges, *l) for l in pairs}
    total = Fraction(0)
    for order in itertools.permutations(fedges):
        rank = {e: i for i, e in enumerate(order)}
        # which h each pair variable becomes on this simplex (None means s=0)
        target = []
        for l in pairs:
            path = paths[l]
            target.append(None if path is None else min(path, key=rank.get))
        for exps, c in d.items():
            powers = [0] * len(order)
            zero = False
            for var, k in enumerate(exps):
                if k:
                    t = target[var]
                    if t is None:
                        zero = True
                        break
                    powers[rank[t]] += k
            if not zero:
                total += c * _simplex_monomial(powers)
    return total


def bkar_rhs(poly: Poly, n: int) -> Fraction:
    return sum((_forest_term(poly, n, F) for F in enumerate_forests(n)), Fraction(0))


def bkar_verify(poly: Poly, n: int) -> Fraction:
    """f(1) minus the forest-formula right side; exactly zero when the identity holds."""
    return evaluate_at_ones(poly) - bkar_rhs(poly, n)


# -- graph versus tree (exponential weights, numeric) -------------------------

def _simplex_nodes(k: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Points and weights on {0 < x_1 < ... < x_k < 1} via collapsed Gauss-Legendre."""
    g, w = np.polynomial.legendre.leggauss(order)
    g = 0.5 * (g + 1)
    w = 0.5 * w
    grids = np.meshgrid(*([g] * k), indexing="ij")
    wgrids = np.meshgrid(*([w] * k), indexing="ij")
    u = [x.ravel() for x in grids]
    weight = np.prod([x.ravel() for x in wgrids], axis=0)
    # x_k = u_k, x_{j} = u_j x_{j+1}
    pts = np.empty((k, u[0].size))
    cur = np.ones(u[0].size)
    for j in range(k - 1, -1, -1):
        cur = cur * u[j]
        pts[j] = cur
        if j > 0:
            weight = weight * cur
    return pts, weight


def _tree_integral(V: Mapping[Edge, complex], n: int, tree: frozenset[Edge], order: int) -> complex:
    pairs = all_pairs(n)
    tedges = sorted(tree)
    k = len(tedges)
    prefactor = np.prod([-V[e] for e in tedges]) if tedges else 1.0
    if k == 0:
        return complex(prefactor * np.exp(-sum(V[l] for l in pairs)))
    pts, wts = _simplex_nodes(k, order)
    paths = {l: forest_path(tedges, *l) for l in pairs}
    total = 0j
    for perm in itertools.permutations(range(k)):
        # perm[j] = tree edge carried by the j-th smallest h
        rank = {tedges[perm[j]]: j for j in range(k)}
        beta = np.zeros(k, dtype=complex)
        for l in pairs:
            beta[rank[min(paths[l], key=rank.get)]] += V[l]
        total += np.sum(wts * np.exp(-beta @ pts))
    return complex(prefactor * total)


def graph_sum(V: Mapping[Edge, complex], n: int) -> complex:
    """Sum over connected graphs g on n vertices of prod_{l in g} (e^{-V_l} - 1)."""
    pairs = all_pairs(n)
    total = 0j
    for mask in range(1 << len(pairs)):
        sub = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
        if is_connected(n, sub):
            total += np.prod([np.exp(-V[l]) - 1 for l in sub]) if sub else 1.0
    return complex(total)


def tree_sum(V: Mapping[Edge, complex], n: int, order: int = 24) -> complex:
    return sum((_tree_integral(V, n, T, order) for T in enumerate_spanning_trees(n)), 0j)


def graph_tree_identity_verify(V: Mapping[Edge, complex], n: int) -> float:
    """|graph side - tree side| for complex pair weights V."""
    return abs(graph_sum(V, n) - tree_sum(V, n))


def is_stable(V: Mapping[Edge, complex], U: Sequence[float], n: int) -> bool:
    for size in range(2, n + 1):
        for S in itertools.combinations(range(n), size):
            tot = sum(V[l] for l in itertools.combinations(S, 2))
            if abs(tot) > sum(U[a] for a in S) * (1 + 1e-12):
                return False
    return True


def tree_inequality_check(V: Mapping[Edge, complex], U, n: int) -> tuple[float, float, bool]:
    """|graph sum| <= e^{sum U} sum_T prod_{l in T} |V_l| (requires stability)."""
    lhs = abs(graph_sum(V, n))
    rhs = math.exp(sum(U)) * sum(float(np.prod([abs(V[e]) for e in T])) if T else 1.0
                                 for T in enumerate_spanning_trees(n))
    return lhs, rhs, lhs <= rhs * (1 + 1e-12)

