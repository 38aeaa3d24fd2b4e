"""Tree-level Wick counts kappa_k.

kappa_k counts the Wick contractions of k external psi legs, k external
psi* legs and k-1 labelled quartic vertices |psi|^4 whose contraction graph
is a tree.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

from ..errors import SizeLimitError

BRUTE_FORCE_CAP = 4


def kappa_closed_form(k: int) -> int:
    """2^{k-1} k! (k-1)! (3k-3)! / (2k-1)!."""
    if k < 1:
        raise ValueError("k >= 1")
    value = Fraction(2 ** (k - 1) * factorial(k) * factorial(k - 1) * factorial(3 * k - 3),
                     factorial(2 * k - 1))
    assert value.denominator == 1
    return value.numerator


@lru_cache(maxsize=None)
def kappa_recurrence(k: int) -> int:
    """(k-2) kappa_k = sum_{i=1}^{k-2} C(k-1,i) C(k,i+1) C(k,k-i) kappa_{i+1} kappa_{k-i}."""
    if k < 1:
        raise ValueError("k >= 1")
    if k == 1:
        return 1
    if k == 2:
        return 4
    total = sum(comb(k - 1, i) * comb(k, i + 1) * comb(k, k - i)
                * kappa_recurrence(i + 1) * kappa_recurrence(k - i) for i in range(1, k - 1))
    value = Fraction(total, k - 2)
    assert value.denominator == 1
    return value.numerator


def kappa_bruteforce(k: int) -> int:
    """Count bijections psi-slots -> psi*-slots whose contraction graph is a spanning tree."""
    if not 1 <= k <= BRUTE_FORCE_CAP:
        raise SizeLimitError(f"brute-force pairing count capped at k={BRUTE_FORCE_CAP}", k=k)
    internal = range(2 * k, 3 * k - 1)
    # node carrying each field slot
    psi = list(range(k)) + [v for v in internal for _ in range(2)]
    psibar = list(range(k, 2 * k)) + [v for v in internal for _ in range(2)]
    nodes = 3 * k - 1
    used = [False] * len(psibar)

    def find(parent, a):
        while parent[a] != a:
            a = parent[a]
        return a

    def rec(i: int, parent: list[int]) -> int:
        if i == len(psi):
            return 1  # nodes-1 acyclic edges form a spanning tree
        count = 0
        ra = find(parent, psi[i])
        for j in range(len(psibar)):
            if used[j]:
                continue
            # the two slots of one vertex are interchangeable only as labels; keep both
            rb = find(parent, psibar[j])
            if ra == rb:
                continue
            used[j] = True
            child = parent.copy()
            child[rb] = ra
            count += rec(i + 1, child)
            used[j] = False
        return count

    return rec(0, list(range(nodes)))


def combident_sides(k: int) -> tuple[Fraction, Fraction]:
    lhs = sum((Fraction(factorial(3 * j) * factorial(3 * k - 3 * j - 3),
                        factorial(j) * factorial(2 * j + 1) * factorial(2 * k - 2 * j - 1)
                        * factorial(k - j - 1)) for j in range(k)), Fraction(0))
    rhs = Fraction(factorial(3 * k - 2), factorial(k) * factorial(2 * k - 1))
    return lhs, rhs


def combident_check(k: int) -> bool:
    lhs, rhs = combident_sides(k)
    return lhs == rhs
