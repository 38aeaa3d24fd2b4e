"""Ursell functions: signed connected-subgraph sums over intersection graphs."""
from __future__ import annotations

import itertools
from functools import lru_cache
from math import comb
from typing import Iterable, Sequence

import numpy as np

from ..errors import SizeLimitError
from .graphs import Edge, SimpleGraph, UnionFind, all_pairs, components, is_connected

URSELL_VERTEX_CAP = 10
BRUTE_FORCE_EDGE_CAP = 8


def _connected_sum_bruteforce(g: SimpleGraph) -> int:
    edges = sorted(g.edges)
    total = 0
    for k in range(len(edges) + 1):
        for sub in itertools.combinations(edges, k):
            if is_connected(g.n, sub):
                total += (-1) ** k
    return total


def _connected_sum_subsets(g: SimpleGraph) -> int:
    """Same signed sum via a recursion on vertex subsets.

    The signed sum over all spanning subgraphs of G[S] is 1 if G[S] has no
    edges and 0 otherwise; splitting off the component of the smallest
    vertex isolates the connected part c(S).
    """
    n = g.n
    adj = [0] * n
    for a, b in g.edges:
        adj[a] |= 1 << b
        adj[b] |= 1 << a

    def edgeless(mask: int) -> int:
        m = mask
        while m:
            v = (m & -m).bit_length() - 1
            if adj[v] & mask:
                return 0
            m &= m - 1
        return 1

    full = (1 << n) - 1
    conn = [0] * (full + 1)
    for mask in range(1, full + 1):
        low = mask & -mask
        rest = mask ^ low
        total = edgeless(mask)
        sub = rest
        # proper subsets T of mask containing the lowest vertex
        while True:
            t = sub | low
            if t != mask:
                total -= conn[t] * edgeless(mask ^ t)
            if sub == 0:
                break
            sub = (sub - 1) & rest
        conn[mask] = total
    return conn[full]


def ursell_connected_sum(g: SimpleGraph) -> int:
    """Sum over connected spanning subgraphs H of G of (-1)^{|H|}."""
    if g.n > URSELL_VERTEX_CAP:
        raise SizeLimitError(f"Ursell evaluation capped at {URSELL_VERTEX_CAP} vertices", n=g.n)
    if g.n == 0:
        return 0
    if len(g.edges) <= BRUTE_FORCE_EDGE_CAP:
        return _connected_sum_bruteforce(g)
    return _connected_sum_subsets(g)


def _poly_mul(p: list[int], q: list[int]) -> list[int]:
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return out


def _poly_sub(p: list[int], q: list[int]) -> list[int]:
    n = max(len(p), len(q))
    p = p + [0] * (n - len(p))
    q = q + [0] * (n - len(q))
    return [a - b for a, b in zip(p, q)]


def _canonical(n: int, edges: Iterable[Edge]) -> tuple[int, frozenset[Edge]]:
    return n, frozenset(edges)


@lru_cache(maxsize=500_000)
def _chromatic(n: int, edges: frozenset[Edge]) -> tuple[int, ...]:
    if not edges:
        return tuple([0] * n + [1])
    comps = components(n, edges)
    if len(comps) > 1:
        out = [1]
        for comp in comps:
            relabel = {v: i for i, v in enumerate(comp)}
            sub = frozenset((relabel[a], relabel[b]) for a, b in edges if a in relabel)
            out = _poly_mul(out, list(_chromatic(len(comp), sub)))
        return tuple(out)
    if len(edges) == n - 1:
        # tree: x (x-1)^{n-1}
        out = [0, 1]
        for _ in range(n - 1):
            out = _poly_mul(out, [-1, 1])
        return tuple(out)
    if len(edges) == comb(n, 2):
        out = [1]
        for k in range(n):
            out = _poly_mul(out, [-k, 1])
        return tuple(out)
    e = max(edges)
    a, b = e
    deleted = edges - {e}
    # contract b into a, shift vertices above b down by one
    def relabel(v):
        v = a if v == b else v
        return v - 1 if v > b else v
    contracted = frozenset(tuple(sorted((relabel(u), relabel(v)))) for u, v in deleted
                           if relabel(u) != relabel(v))
    return tuple(_poly_sub(list(_chromatic(n, deleted)), list(_chromatic(n - 1, contracted))))


def chromatic_polynomial(g: SimpleGraph) -> list[int]:
    """Coefficients (constant term first) by deletion-contraction."""
    return list(_chromatic(*_canonical(g.n, g.edges)))


def ursell_via_chromatic(g: SimpleGraph) -> int:
    """Coefficient of x in the chromatic polynomial of G."""
    if g.n > URSELL_VERTEX_CAP:
        raise SizeLimitError(f"Ursell evaluation capped at {URSELL_VERTEX_CAP} vertices", n=g.n)
    poly = chromatic_polynomial(g)
    return poly[1] if len(poly) > 1 else 0


def intersection_graph(polymers: Sequence[frozenset]) -> SimpleGraph:
    p = len(polymers)
    return SimpleGraph(p, frozenset((i, j) for i, j in itertools.combinations(range(p), 2)
                                    if polymers[i] & polymers[j]))


def ursell_for_polymers(polymers: Sequence[Iterable]) -> int:
    """phi^T(R_1, ..., R_p) through the intersection graph."""
    polys = [frozenset(r) for r in polymers]
    return _ursell_of_graph(intersection_graph(polys))


@lru_cache(maxsize=200_000)
def _ursell_of_graph(g: SimpleGraph) -> int:
    return ursell_connected_sum(g)


def ursell_reduction_check(z, polymers: Sequence[Iterable]) -> bool:
    """phi^T({z}, R_1..R_p) == -r phi^T(R_1..R_p) with r = #{q : z in R_q}."""
    polys = [frozenset(r) for r in polymers]
    r = sum(z in p for p in polys)
    lhs = ursell_for_polymers([frozenset({z})] + polys)
    return lhs == -r * ursell_for_polymers(polys)


def ursell_reduction_check_abstract(p_max: int) -> tuple[int, int]:
    """Reduction identity for every graph on p <= p_max vertices and every clique S.

    A singleton polymer meets exactly the polymers containing its site, and
    those pairwise intersect, so every concrete family reduces to some
    (graph, clique) pair. Returns (cases checked, failures).
    """
    checked = failures = 0
    for p in range(1, p_max + 1):
        pairs = all_pairs(p)
        for mask in range(1 << len(pairs)):
            edges = frozenset(e for i, e in enumerate(pairs) if mask >> i & 1)
            g = SimpleGraph(p, edges)
            base = _ursell_of_graph(g)
            for size in range(p + 1):
                for clique in itertools.combinations(range(p), size):
                    if any((a, b) not in edges for a, b in itertools.combinations(clique, 2)):
                        continue
                    ext = SimpleGraph(p + 1, edges | {(c, p) for c in clique})
                    checked += 1
                    if _ursell_of_graph(ext) != -size * base:
                        failures += 1
    return checked, failures


def ursell_table_all_graphs(n: int) -> np.ndarray:
    """Ursell value of every graph on n labelled vertices, indexed by edge bitmask.

    Evaluated literally: the signed indicator of connected spanning subgraphs
    is summed over the subgraphs of every graph with a subset-sum transform.
    """
    pairs = all_pairs(n)
    L = len(pairs)
    if L > 20:
        raise SizeLimitError("table limited to 20 edges", n=n)
    g = np.zeros(1 << L, dtype=np.int64)
    for mask in range(1 << L):
        uf = UnionFind(n)
        k = 0
        for i, (a, b) in enumerate(pairs):
            if mask >> i & 1:
                uf.union(a, b)
                k += 1
        if uf.components == 1:
            g[mask] = -1 if k % 2 else 1
    idx = np.arange(1 << L)
    for i in range(L):
        bit = 1 << i
        has = (idx & bit) != 0
        g[has] += g[idx[has] ^ bit]
    return g


def ursell_equivalence_exhaustive(n: int) -> tuple[int, int]:
    """Compare the subgraph table with deletion-contraction for all graphs on n vertices."""
    table = ursell_table_all_graphs(n)
    pairs = all_pairs(n)
    failures = 0
    for mask in range(len(table)):
        edges = frozenset(e for i, e in enumerate(pairs) if mask >> i & 1)
        if int(table[mask]) != ursell_via_chromatic(SimpleGraph(n, edges)):
            failures += 1
    return len(table), failures
