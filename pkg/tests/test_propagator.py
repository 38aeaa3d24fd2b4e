import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from clusterbounds.errors import NotPositiveDefiniteError
from clusterbounds.model import Model, Volume, random_model
from clusterbounds.propagator import (build_j_matrix, covariance_direct, covariance_neumann, decay_constants,
                                      l1_constant, make_covariance, min_eigenvalue, verify_decay)


def test_j_matrix_two_sites(nn_chain, two_sites):
    jm = build_j_matrix(nn_chain, two_sites)
    np.testing.assert_allclose(jm, [[2, 0.5], [0.5, 2]])
    C = covariance_direct(jm)
    # inverse of [[2, .5], [.5, 2]] = [[2, -.5], [-.5, 2]] / 3.75
    np.testing.assert_allclose(C, np.array([[2, -0.5], [-0.5, 2]]) / 3.75, atol=1e-15)


def test_decay_constants_example():
    k0, mu0 = decay_constants(Model.nearest_neighbor(1, 2.0, 0.5, 1.0))
    # J_neq = 1, r0 = 2: K0 = 2 / (1 * 1), mu0 = log(2) / 2
    assert k0 == pytest.approx(2.0)
    assert mu0 == pytest.approx(math.log(2) / 2)


def test_not_positive_definite_raises():
    with pytest.raises(NotPositiveDefiniteError):
        covariance_direct(np.array([[1.0, 2.0], [2.0, 1.0]]))


@pytest.mark.parametrize("mu", [0.3, 1.0, 5.0, 20.0])
def test_l1_constant_d1_closed_form(mu):
    # sum_{z in Z} e^{-mu|z|} = coth(mu/2)
    exact = 1 / math.tanh(mu / 2)
    val = l1_constant(1, mu)
    assert exact <= val <= exact * (1 + 1e-8)


def test_l1_constant_d2_against_box_sum():
    mu = 1.5
    r = np.arange(-60, 61)
    X, Y = np.meshgrid(r, r)
    box = float(np.exp(-mu * np.sqrt(X ** 2 + Y ** 2)).sum())
    val = l1_constant(2, mu)
    assert box <= val <= box * (1 + 1e-8)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), d=st.integers(1, 3))
def test_propagator_invariants(seed, d):
    rng = np.random.default_rng(seed)
    m = random_model(rng, d)
    side = {1: 8, 2: 4, 3: 3}[d]
    vol = Volume.box((side,) * d)
    jm = build_j_matrix(m, vol)
    assert np.allclose(jm, jm.conj().T)
    assert min_eigenvalue(jm) >= m.j0 - m.j_neq - 1e-10
    cov = make_covariance(m, vol)
    assert np.max(np.abs(cov.matrix @ jm - np.eye(len(vol)))) <= 1e-10
    assert verify_decay(cov).holds
    Cn, err = covariance_neumann(m, vol, 30)
    assert np.max(np.abs(Cn - cov.matrix)) <= err + 1e-12
