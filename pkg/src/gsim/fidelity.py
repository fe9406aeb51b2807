"""Hilbert-Schmidt loss for free-fermion circuits without dense unitaries.

Every unitary generated by the free-fermion algebra rotates the ``2n``
Majorana strings among themselves by an orthogonal matrix ``R``.  For such a
unitary ``W``, ``|Tr W|^2 = det(I + R_W)``: both sides factor over the
eigen-angle pairs of ``R_W`` into ``4 cos^2(phi_k / 2)``.  With
``W = U^dag V`` this gives the Hilbert-Schmidt test loss from two ``2n x 2n``
matrices, which is what makes verification at n = 12 cheap.
"""

from __future__ import annotations

import numpy as np

from .circuits import Circuit, adjoint_matrix, target_adjoint
from .lie import LieBasis, majorana_basis
from .pauli import PauliSum


def majorana_rotation(circuit: Circuit, params, basis: LieBasis | None = None) -> np.ndarray:
    basis = majorana_basis(circuit.n) if basis is None else basis
    return adjoint_matrix(circuit, params, basis)


def hst_loss_from_rotations(r_u: np.ndarray, r_v: np.ndarray) -> float:
    """``1 - det(I + R_U^T R_V) / 4^n`` for ``2n x 2n`` orthogonal rotations."""
    dim = r_u.shape[0]
    if dim % 2 or r_u.shape != r_v.shape:
        raise ValueError("expected matching 2n x 2n Majorana rotations")
    n = dim // 2
    sign, logdet = np.linalg.slogdet(np.eye(dim) + r_u.T @ r_v)
    overlap = 0.0 if sign <= 0 else float(np.exp(logdet - n * np.log(4.0)))
    return 1.0 - overlap


def free_fermion_hst_loss(circuit: Circuit, params, h: PauliSum, t: float, basis: LieBasis | None = None) -> float:
    """Hilbert-Schmidt loss between the circuit and ``exp(-i t H)``, both free-fermionic."""
    basis = majorana_basis(circuit.n) if basis is None else basis
    return hst_loss_from_rotations(majorana_rotation(circuit, params, basis), target_adjoint(h, t, basis))
