"""Exact combinatorics: graphs, forests, Ursell functions, forest formula, Wick counts."""
from .bkar import (bkar_verify, graph_tree_identity_verify, random_polynomial,
                   tree_inequality_check)
from .graphs import (SimpleGraph, bkar_point, enumerate_forests, enumerate_spanning_trees)
from .kappa import (combident_check, kappa_bruteforce, kappa_closed_form, kappa_recurrence)
from .trees import cayley_degree_count, suminpoly_check, sumtreedegree_check
from .ursell import (chromatic_polynomial, ursell_connected_sum, ursell_for_polymers,
                     ursell_reduction_check, ursell_via_chromatic)

__all__ = [
    "SimpleGraph", "bkar_point", "bkar_verify", "cayley_degree_count", "chromatic_polynomial",
    "combident_check", "enumerate_forests", "enumerate_spanning_trees",
    "graph_tree_identity_verify", "kappa_bruteforce", "kappa_closed_form", "kappa_recurrence",
    "random_polynomial", "suminpoly_check", "sumtreedegree_check", "tree_inequality_check",
    "ursell_connected_sum", "ursell_for_polymers", "ursell_reduction_check",
    "ursell_via_chromatic",
]
