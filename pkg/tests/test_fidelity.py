import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from gsim import oracle
from gsim.fidelity import free_fermion_hst_loss, hst_loss_from_rotations, majorana_rotation
from gsim.lie import g0_basis, majorana_basis
from gsim.models import hva_tfxy_circuit, random_algebra_hamiltonian, two_local_circuit


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_matches_dense_hst(n):
    rng = np.random.default_rng(n)
    c = two_local_circuit(n, 2)
    theta = rng.normal(size=c.n_params)
    h = random_algebra_hamiltonian(g0_basis(n), rng)
    t = 0.7
    dense = oracle.hst_loss(c, theta, expm(-1j * t * h.to_matrix()))
    assert free_fermion_hst_loss(c, theta, h, t) == pytest.approx(dense, abs=1e-12)


def test_self_overlap_is_zero():
    rng = np.random.default_rng(0)
    c = hva_tfxy_circuit(8, 40)
    r = majorana_rotation(c, rng.normal(size=40))
    assert hst_loss_from_rotations(r, r) == pytest.approx(0.0, abs=1e-12)


def test_majorana_rotation_is_orthogonal():
    rng = np.random.default_rng(1)
    c = hva_tfxy_circuit(5, 20)
    r = majorana_rotation(c, rng.normal(size=20), majorana_basis(5))
    assert r.shape == (10, 10)
    assert np.allclose(r.T @ r, np.eye(10))


def test_rejects_odd_dimension():
    with pytest.raises(ValueError):
        hst_loss_from_rotations(np.eye(3), np.eye(3))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_in_unit_interval(seed):
    rng = np.random.default_rng(seed)
    c = hva_tfxy_circuit(4, 10)
    loss = hst_loss_from_rotations(majorana_rotation(c, rng.normal(size=10)), majorana_rotation(c, rng.normal(size=10)))
    assert -1e-12 <= loss <= 1 + 1e-12
