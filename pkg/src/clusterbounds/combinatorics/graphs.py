"""Simple graphs on vertices 0..n-1, spanning trees and forests."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from ..errors import SizeLimitError

Edge = tuple[int, int]

TREE_VERTEX_CAP = 9
FOREST_VERTEX_CAP = 7


def edge(a: int, b: int) -> Edge:
    if a == b:
        raise ValueError("loops are not allowed")
    return (a, b) if a < b else (b, a)


def all_pairs(n: int) -> list[Edge]:
    return list(itertools.combinations(range(n), 2))


@dataclass(frozen=True)
class SimpleGraph:
    n: int
    edges: frozenset[Edge]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "SimpleGraph":
        es = frozenset(edge(a, b) for a, b in edges)
        if any(not (0 <= a < n and 0 <= b < n) for a, b in es):
            raise ValueError("edge endpoint outside vertex set")
        return cls(n, es)

    @classmethod
    def complete(cls, n: int) -> "SimpleGraph":
        return cls(n, frozenset(all_pairs(n)))

    def degree(self, v: int) -> int:
        return sum(v in e for e in self.edges)


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.components = n

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        self.components -= 1
        return True


def is_connected(n: int, edges: Iterable[Edge]) -> bool:
    uf = UnionFind(n)
    for a, b in edges:
        uf.union(a, b)
    return uf.components == 1


def is_forest(n: int, edges: Iterable[Edge]) -> bool:
    uf = UnionFind(n)
    return all(uf.union(a, b) for a, b in edges)


def components(n: int, edges: Iterable[Edge]) -> list[list[int]]:
    uf = UnionFind(n)
    for a, b in edges:
        uf.union(a, b)
    groups: dict[int, list[int]] = {}
    for v in range(n):
        groups.setdefault(uf.find(v), []).append(v)
    return list(groups.values())


def prufer_to_tree(seq: tuple[int, ...], n: int) -> frozenset[Edge]:
    degree = [1] * n
    for v in seq:
        degree[v] += 1
    edges = []
    for v in seq:
        leaf = min(u for u in range(n) if degree[u] == 1)
        edges.append(edge(leaf, v))
        degree[leaf] -= 1
        degree[v] -= 1
    u, w = [x for x in range(n) if degree[x] == 1]
    edges.append(edge(u, w))
    return frozenset(edges)


def enumerate_spanning_trees(n: int) -> Iterator[frozenset[Edge]]:
    """All labelled trees on n vertices (n^{n-2} of them) via Pruefer codes."""
    if n > TREE_VERTEX_CAP:
        raise SizeLimitError(f"tree enumeration capped at {TREE_VERTEX_CAP} vertices", n=n)
    if n == 1:
        yield frozenset()
        return
    if n == 2:
        yield frozenset({(0, 1)})
        return
    for seq in itertools.product(range(n), repeat=n - 2):
        yield prufer_to_tree(seq, n)


def enumerate_forests(n: int) -> Iterator[frozenset[Edge]]:
    """All forests (acyclic edge sets, empty one included) of the complete graph on n vertices."""
    if n > FOREST_VERTEX_CAP:
        raise SizeLimitError(f"forest enumeration capped at {FOREST_VERTEX_CAP} vertices", n=n)
    pairs = all_pairs(n)

    def rec(i: int, chosen: list[Edge]):
        if i == len(pairs):
            yield frozenset(chosen)
            return
        yield from rec(i + 1, chosen)
        a, b = pairs[i]
        if is_forest(n, chosen + [(a, b)]):
            chosen.append((a, b))
            yield from rec(i + 1, chosen)
            chosen.pop()

    yield from rec(0, [])


def forest_path(forest: Iterable[Edge], a: int, b: int) -> list[Edge] | None:
    """Edges on the unique forest path from a to b, or None if disconnected."""
    adj: dict[int, list[int]] = {}
    for u, v in forest:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    prev = {a: None}
    stack = [a]
    while stack:
        u = stack.pop()
        if u == b:
            break
        for v in adj.get(u, ()):
            if v not in prev:
                prev[v] = u
                stack.append(v)
    if b not in prev:
        return None
    path, v = [], b
    while prev[v] is not None:
        path.append(edge(v, prev[v]))
        v = prev[v]
    return path


def bkar_point(n: int, forest: Iterable[Edge], h: Mapping[Edge, float]) -> dict[Edge, float]:
    """Interpolation point s(F, h): min of h along the forest path, 0 across components."""
    forest = list(forest)
    out = {}
    for a, b in all_pairs(n):
        path = forest_path(forest, a, b)
        out[(a, b)] = 0.0 if path is None else min(h[e] for e in path)
    return out


def tree_degrees(n: int, tree: Iterable[Edge]) -> list[int]:
    deg = [0] * n
    for a, b in tree:
        deg[a] += 1
        deg[b] += 1
    return deg
