import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from clusterbounds.errors import InvalidNError, SizeLimitError
from clusterbounds.model import Model, Volume
from clusterbounds.polymer import (LARGE_LAMBDA, LARGE_MASS, SMALL_COUPLING, PinnedExpansion, activity_bound_gaussian,
                                   activity_bound_quartic, enumerate_polymers, exact_activity, fp_criterion,
                                   norm_bound_sourcefree, pinned_cluster_sum, pinned_sum_rooted, polymer_norm,
                                   theorem_rhs, tree_weight_sum, varrho_family, varsigma_family, witness_threshold)

NN = Model.nearest_neighbor(1, 2.0, 0.5, 1.0)
LARGE_MASS_MODEL = Model.nearest_neighbor(1, 1e4, 0.5, 1.0)
LARGE_LAMBDA_MODEL = Model.nearest_neighbor(1, 2.0, 0.005, 1e6)


def sites(*xs):
    return [(x,) for x in xs]


# -- tree sums and activity bounds ------------------------------------------------

def test_tree_weight_sum_examples():
    assert tree_weight_sum(sites(0), NN, 0.5) == 1.0
    for beta in (0.25, 0.5, 1.0):
        assert tree_weight_sum(sites(0, 1), NN, beta) == pytest.approx(0.5)
        # only the path 0-1-2 uses nonzero couplings; the middle vertex has degree 2
        assert tree_weight_sum(sites(0, 1, 2), NN, beta) == pytest.approx(2 ** beta * 0.25)


def test_tree_weight_sum_cap():
    with pytest.raises(SizeLimitError):
        tree_weight_sum(sites(*range(9)), NN, 0.5)


def test_activity_bound_examples():
    x = 2 + math.sqrt(0.5)
    assert activity_bound_gaussian(sites(0), [], NN) == 0.0
    # J_neq = 1 for the chain with hopping 0.5
    assert activity_bound_gaussian(sites(0), sites(0), NN) == pytest.approx(2 ** 1.5 * x * 1.0)
    # exponent 11|R|/2 + 3|J|/4 - 5/2 = 15/4 at |R| = |J| = 1
    assert activity_bound_quartic(sites(0), sites(0), NN) == pytest.approx(2 ** 3.75 * x)
    # |R|=2 adjacent, no sources: 2^4 x^2 (J0-Jn)^{-3} * 0.5
    assert activity_bound_gaussian(sites(0, 1), [], NN) == pytest.approx(2 ** 4 * x ** 2 * 0.5)
    assert activity_bound_gaussian(sites(0), sites(3), NN) == 0.0


def test_quartic_decreasing_in_lambda():
    vals = [activity_bound_quartic(sites(0, 1), sites(0), NN.with_lambda(l)) for l in (10, 1e2, 1e3, 1e4)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_quartic_beats_gaussian_only_at_large_lambda():
    R, J = sites(0, 1), sites(0)
    assert activity_bound_quartic(R, J, NN.with_lambda(1.0)) > activity_bound_gaussian(R, J, NN.with_lambda(1.0))
    big = NN.with_lambda(1e8)
    assert activity_bound_quartic(R, J, big) < activity_bound_gaussian(R, J, big)


@pytest.mark.parametrize("model", [NN, LARGE_MASS_MODEL, Model.nearest_neighbor(1, 1.0, 0.3 + 0.2j, 5.0)])
@pytest.mark.parametrize("srcs", [[], [((0,), False), ((0,), True)], [((0,), False), ((1,), True)],
                                  [((0,), False), ((1,), True), ((1,), False), ((1,), True)]])
def test_activity_bounds_dominate_exact(model, srcs):
    R = sites(0, 1)
    exact = abs(exact_activity(R, srcs, model))
    J = [x for x, _ in srcs]
    assert exact <= activity_bound_gaussian(R, J, model)
    assert exact <= activity_bound_quartic(R, J, model)


def test_exact_activity_gaussian_limit():
    # lambda -> 0: <psi0 psi1* e^{-I}> = (J0^2 / det A) C(0,1)
    m = Model.nearest_neighbor(1, 2.0, 0.5, 1e-12)
    assert exact_activity(sites(0, 1), [], m) == pytest.approx(4 / 3.75 - 1, abs=1e-10)
    assert exact_activity(sites(0, 1), [((0,), False), ((1,), True)], m) == pytest.approx(
        4 / 3.75 * (-0.5 / 3.75), abs=1e-10)
    assert exact_activity(sites(0), [], m) == 0


# -- source-free norm and the convergence criterion ------------------------------

def test_sourcefree_ratio_example():
    m = Model.nearest_neighbor(1, 2.0, 0.005, 1.0)
    A, ok, ratio = norm_bound_sourcefree(m)
    assert ratio == pytest.approx(2 ** 7 * 0.01 * (2 + math.sqrt(0.5)) / 1.99 ** 2)
    assert ratio == pytest.approx(0.875, abs=1e-3)
    assert not ok


def test_sourcefree_limits():
    As = [norm_bound_sourcefree(Model.nearest_neighbor(1, j0, 0.5, 1.0))[0] for j0 in (1e3, 1e4, 1e5)]
    assert As[0] > As[1] > As[2]
    _, ok, ratio = norm_bound_sourcefree(NN.with_lambda(1e12), "quartic")
    assert ok and ratio < 1e-3


def test_fp_criterion_trivial():
    vol = Volume.chain(3)
    assert fp_criterion(lambda R: 0.0, vol, 3).norm == 0
    res = fp_criterion(lambda R: 0.4 if R == frozenset({(0,)}) else 0.0, vol, 3)
    assert res.norm == pytest.approx(0.8) and res.convergent


@pytest.mark.parametrize("j0", [10.0, 100.0, 1000.0])
def test_gaussian_family_converges_in_large_mass(j0):
    m = Model.nearest_neighbor(1, j0, 0.01, 1.0)
    _, ok, _ = norm_bound_sourcefree(m)
    # full enumeration of the volume, so no tail term
    res = fp_criterion(lambda R: activity_bound_gaussian(R, [], m), Volume.chain(6), 6, m)
    assert ok and res.convergent


@pytest.mark.parametrize("model,estimate,bound", [(LARGE_MASS_MODEL, "gaussian", activity_bound_gaussian),
                                                  (LARGE_LAMBDA_MODEL, "quartic", activity_bound_quartic)])
def test_geometric_bound_dominates_enumeration(model, estimate, bound):
    A, ok, _ = norm_bound_sourcefree(model, estimate)
    res = fp_criterion(lambda R: bound(R, [], model), Volume.chain(7), 5, model)
    assert ok and res.norm <= A


def test_enumerate_polymers_pruning():
    vol = Volume.chain(4)
    assert len(enumerate_polymers(vol, 4)) == 15
    # nearest-neighbor support keeps only intervals
    assert len(enumerate_polymers(vol, 4, model=NN)) == 10
    assert all((0,) in R for R in enumerate_polymers(vol, 3, containing=(0,)))


# -- pinned cluster sums -----------------------------------------------------------

def normalized_family(rng, polys):
    vals = {R: float(v) for R, v in zip(polys, rng.exponential(size=len(polys)))}
    n = polymer_norm(vals)
    return {R: v / n for R, v in vals.items()}


def test_pinned_sum_single_polymer():
    fam = {frozenset({(0,)}): 0.5}
    assert pinned_cluster_sum(fam, (0,), 1) == [0.5]


def test_pinned_sum_overlapping_pair():
    a, b = frozenset(sites(0, 1)), frozenset(sites(1, 2))
    fam = {a: 0.05, b: 0.05}
    sums = pinned_cluster_sum(fam, (1,), 3)
    assert sums[0] == pytest.approx(0.1)
    assert all(x <= y for x, y in zip(sums, sums[1:])) and sums[-1] <= 1


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 4))
def test_pinned_sums_bounded(seed, size):
    rng = np.random.default_rng(seed)
    vol = Volume.chain(size)
    polys = enumerate_polymers(vol, size)
    fam = normalized_family(rng, polys)
    exp = PinnedExpansion.build(polys, 3, pin=(0,))
    sums = exp.partial_sums([fam[R] for R in polys])
    assert all(x <= y + 1e-15 for x, y in zip(sums, sums[1:]))
    assert sums[-1] <= 1 + 1e-12
    rooted = pinned_sum_rooted(fam, frozenset({(0,)}), 3)
    assert rooted[-1] <= 1 + 1e-12


def test_pinned_expansion_cap():
    with pytest.raises(SizeLimitError):
        PinnedExpansion.build([frozenset({(0,)})], 6, pin=(0,))


# -- theorem right-hand sides ------------------------------------------------------

def test_large_mass_rhs_example():
    rep = theorem_rhs(LARGE_MASS, LARGE_MASS_MODEL, 2)
    assert rep.satisfied
    assert rep.rhs == pytest.approx(2 * 16 ** 2 * 2 ** 4 / (1e4 - 1), rel=1e-14)


def test_large_lambda_rhs_scaling():
    a = theorem_rhs(LARGE_LAMBDA, LARGE_LAMBDA_MODEL, 4)
    b = theorem_rhs(LARGE_LAMBDA, LARGE_LAMBDA_MODEL.with_lambda(16e6), 4)
    assert a.satisfied and b.satisfied
    assert b.rhs / a.rhs == pytest.approx(16 ** -1, rel=1e-14)


def test_odd_and_invalid_n():
    assert theorem_rhs(LARGE_MASS, LARGE_MASS_MODEL, 3).rhs == 0
    with pytest.raises(InvalidNError):
        theorem_rhs(LARGE_MASS, LARGE_MASS_MODEL, 0)


def test_unsatisfied_conditions_still_report():
    rep = theorem_rhs(LARGE_MASS, NN, 2)
    assert not rep.satisfied and rep.rhs > 0


@settings(max_examples=40, deadline=None)
@given(st.floats(1.5, 1e6), st.floats(1.01, 10))
def test_large_mass_rhs_decreasing_in_j0(j0, factor):
    a = theorem_rhs(LARGE_MASS, Model.nearest_neighbor(1, j0, 0.5, 1.0), 4).rhs
    b = theorem_rhs(LARGE_MASS, Model.nearest_neighbor(1, j0 * factor, 0.5, 1.0), 4).rhs
    assert b < a


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-2, 1e10), st.floats(1.01, 10))
def test_large_lambda_rhs_decreasing_in_lambda(lam, factor):
    a = theorem_rhs(LARGE_LAMBDA, NN.with_lambda(lam), 2).rhs
    b = theorem_rhs(LARGE_LAMBDA, NN.with_lambda(lam * factor), 2).rhs
    assert b < a


@pytest.mark.parametrize("regime,model,family,bound", [
    (LARGE_MASS, LARGE_MASS_MODEL, varrho_family, None),
    (LARGE_LAMBDA, LARGE_LAMBDA_MODEL, varsigma_family, None),
])
def test_norm_conditions_imply_enumerated_norm(regime, model, family, bound):
    rep = theorem_rhs(regime, model, 2)
    assert rep.satisfied
    res = fp_criterion(family(model, rep.gamma), Volume.chain(7), 5, model)
    assert res.norm <= rep.norm_bound <= 1


def test_witness_thresholds():
    t = witness_threshold(LARGE_MASS, Model.nearest_neighbor(1, 2.0, 0.5, 1.0))
    assert theorem_rhs(LARGE_MASS, Model.nearest_neighbor(1, t, 0.5, 1.0), 2).satisfied
    assert not theorem_rhs(LARGE_MASS, Model.nearest_neighbor(1, t * 0.999, 0.5, 1.0), 2).satisfied
    lam = witness_threshold(LARGE_LAMBDA, Model.nearest_neighbor(1, 2.0, 0.005, 1.0))
    assert theorem_rhs(LARGE_LAMBDA, Model.nearest_neighbor(1, 2.0, 0.005, lam), 2).satisfied
    jn = witness_threshold(SMALL_COUPLING, Model.nearest_neighbor(1, 2.0, 0.5, 1.0))
    assert theorem_rhs(SMALL_COUPLING, Model.nearest_neighbor(1, 2.0, jn / 2, 1.0), 2).satisfied
