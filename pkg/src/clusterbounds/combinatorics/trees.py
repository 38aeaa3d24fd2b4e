"""Counting bounds for labelled trees and for site sequences inside a polymer."""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from math import factorial
from typing import Sequence

from ..errors import InvalidDegreeSequenceError
from .graphs import enumerate_spanning_trees, tree_degrees


def cayley_degree_count(degrees: Sequence[int]) -> int:
    """Number of labelled trees with the given vertex degrees: (m-2)! / prod (d_i - 1)!."""
    m = len(degrees)
    if m == 1 and tuple(degrees) == (0,):
        return 1
    if m < 2 or any(d < 1 for d in degrees) or sum(degrees) != 2 * m - 2:
        raise InvalidDegreeSequenceError(f"not a tree degree sequence: {tuple(degrees)}")
    value = Fraction(factorial(m - 2), math.prod(factorial(d - 1) for d in degrees))
    return value.numerator


def tree_degree_factorial_sum(m: int) -> int:
    """sum over trees t on m vertices of prod_i d_t(i)!, by enumeration."""
    return sum(math.prod(factorial(d) for d in tree_degrees(m, t))
               for t in enumerate_spanning_trees(m))


def sumtreedegree_check(m: int) -> tuple[int, int, bool]:
    """(lhs, rhs, holds) for sum_t prod d_t(i)! <= 2^{3m-3} (m-2)!."""
    lhs = tree_degree_factorial_sum(m)
    rhs = 2 ** (3 * m - 3) * factorial(m - 2)
    return lhs, rhs, lhs <= rhs


def in_polymer_sum(size: int, k: int, beta: float) -> float:
    """sum_{y in R^k} prod_{x in R} c_y(x)!^beta, grouped by occupation numbers."""
    total = 0.0
    for occ in _compositions(k, size):
        multinom = factorial(k) // math.prod(factorial(c) for c in occ)
        total += multinom * math.exp(beta * sum(math.lgamma(c + 1) for c in occ))
    return total


def in_polymer_sum_bruteforce(size: int, k: int, beta: float) -> float:
    total = 0.0
    for ys in itertools.product(range(size), repeat=k):
        total += math.prod(factorial(ys.count(x)) ** beta for x in range(size))
    return total


def _compositions(k: int, parts: int):
    if parts == 1:
        yield (k,)
        return
    for first in range(k + 1):
        for rest in _compositions(k - first, parts - 1):
            yield (first,) + rest


def suminpoly_check(size: int, k: int, beta: float) -> tuple[float, float, bool]:
    lhs = in_polymer_sum(size, k, beta)
    rhs = 2.0 ** (size + k - 1) * factorial(k) ** max(beta, 1.0)
    return lhs, rhs, lhs <= rhs * (1 + 1e-12)
