"""Brute-force reference simulation for small qubit counts.

Everything here works on dense amplitudes or density matrices and exists to
check the adjoint-picture engine.  Index bit ``j - 1`` is qubit ``j``.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as splinalg

from .circuits import Circuit, Gate
from .lie import LieBasis, ResourceLimitError
from .pauli import PauliString, PauliSum, pauli_matrix

MAX_SV_QUBITS = 16
MAX_DM_QUBITS = 8
MAX_HST_QUBITS = 10
MAX_ED_QUBITS = 16
MAX_ADJOINT_QUBITS = 6


def _cap(n: int, cap: int, what: str):
    if n > cap:
        raise ResourceLimitError(f"{what} limited to n <= {cap}, got {n}")


def apply_pauli(psi: np.ndarray, p: PauliString) -> np.ndarray:
    """``P psi`` along axis 0 (works for vectors and for matrices column-wise)."""
    k = np.arange(1 << p.n, dtype=np.int64)
    src = k ^ p.x_mask
    signs = 1 - 2 * (np.bitwise_count(src & p.z_mask).astype(np.int64) & 1)
    phase = 1j ** ((p.x_mask & p.z_mask).bit_count() % 4)
    fac = phase * signs
    return fac.reshape((-1,) + (1,) * (psi.ndim - 1)) * psi[src]


def apply_pauli_rotation(psi: np.ndarray, p: PauliString, phi: float) -> np.ndarray:
    """``exp(-i phi P) psi = cos(phi) psi - i sin(phi) P psi``."""
    if p.is_identity:
        return np.exp(-1j * phi) * psi
    return np.cos(phi) * psi - 1j * np.sin(phi) * apply_pauli(psi, p)


def zero_state(n: int) -> np.ndarray:
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = 1.0
    return psi


def sv_evolve(psi: np.ndarray, circuit: Circuit, params) -> np.ndarray:
    _cap(circuit.n, MAX_SV_QUBITS, "statevector simulation")
    if circuit.has_noise:
        raise ValueError("statevector path needs a unitary-only circuit")
    params = circuit.check_params(params)
    psi = np.array(psi, dtype=complex, copy=True)
    for g in circuit.gates:
        th = g.theta(params)
        for c, p in g.generator.terms():
            psi = apply_pauli_rotation(psi, p, c * th)
    return psi


def sv_expectation(psi: np.ndarray, op: PauliSum) -> float:
    return float(sum(c * np.vdot(psi, apply_pauli(psi, p)).real for c, p in op.terms()))


def circuit_unitary(circuit: Circuit, params) -> np.ndarray:
    _cap(circuit.n, MAX_HST_QUBITS, "dense unitary")
    return sv_evolve(np.eye(1 << circuit.n, dtype=complex), circuit, params)


def dm_noisy_evolve(rho: np.ndarray, circuit: Circuit, params) -> np.ndarray:
    _cap(circuit.n, MAX_DM_QUBITS, "density-matrix simulation")
    params = circuit.check_params(params)
    rho = np.array(rho, dtype=complex, copy=True)
    for el in circuit.elements:
        if isinstance(el, Gate):
            th = el.theta(params)
            for c, p in el.generator.terms():
                rho = apply_pauli_rotation(rho, p, c * th)
                rho = apply_pauli_rotation(rho.conj().T, p, c * th).conj().T
        else:
            out = np.zeros_like(rho)
            for prob, v in el.terms:
                if prob:
                    out += prob * apply_pauli(apply_pauli(rho, v).conj().T, v).conj().T
            rho = out
    return rho


def dm_expectation(rho: np.ndarray, p: PauliString) -> float:
    return float(np.trace(apply_pauli(rho, p)).real)


def hst_loss(circuit: Circuit, params, v_dense: np.ndarray) -> float:
    """``1 - |Tr(U^dag V)|^2 / d^2``."""
    u = circuit_unitary(circuit, params)
    d = u.shape[0]
    return float(1.0 - abs(np.vdot(u, v_dense)) ** 2 / d**2)


def pauli_sum_sparse(op: PauliSum) -> sparse.csr_matrix:
    _cap(op.n, MAX_ED_QUBITS, "sparse Hamiltonian")
    d = 1 << op.n
    k = np.arange(d, dtype=np.int64)
    rows, cols, vals = [], [], []
    for c, p in op.terms():
        src = k ^ p.x_mask
        signs = 1 - 2 * (np.bitwise_count(src & p.z_mask).astype(np.int64) & 1)
        rows.append(k)
        cols.append(src)
        vals.append(c * (1j ** ((p.x_mask & p.z_mask).bit_count() % 4)) * signs)
    if not rows:
        return sparse.csr_matrix((d, d), dtype=complex)
    return sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(d, d))


def exact_ground_state(op: PauliSum) -> tuple[float, np.ndarray]:
    """Lowest eigenpair; dense LAPACK up to 8 qubits, Lanczos above."""
    _cap(op.n, MAX_ED_QUBITS, "exact diagonalization")
    if op.n <= 8:
        w, v = np.linalg.eigh(op.to_matrix())
        return float(w[0]), v[:, 0]
    h = pauli_sum_sparse(op)
    w, v = splinalg.eigsh(h, k=1, which="SA", tol=1e-12)
    return float(w[0]), v[:, 0]


def power_iteration_ground_energy(op: PauliSum, iters: int = 5000, seed: int = 0) -> float:
    """Ground energy by power iteration on ``c I - H`` (independent cross-check)."""
    h = pauli_sum_sparse(op)
    shift = sum(abs(c) for c, _ in op.terms())
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=h.shape[0]) + 1j * rng.normal(size=h.shape[0])
    psi /= np.linalg.norm(psi)
    for _ in range(iters):
        psi = shift * psi - h @ psi
        psi /= np.linalg.norm(psi)
    return float(np.vdot(psi, h @ psi).real)


def dense_adjoint(op: PauliSum, basis: LieBasis) -> np.ndarray:
    """``M[a, b] = -Tr(B_b [H, B_a]) / 2**n`` evaluated with explicit matrices."""
    _cap(basis.n, MAX_ADJOINT_QUBITS, "dense adjoint evaluation")
    h = op.to_matrix()
    mats = [pauli_matrix(p) for p in basis]
    d = 1 << basis.n
    out = np.zeros((basis.dim, basis.dim), dtype=complex)
    for a, ba in enumerate(mats):
        comm = h @ ba - ba @ h
        for b, bb in enumerate(mats):
            out[a, b] = -np.trace(bb @ comm) / d
    return out


def expectation_vector_dense(psi: np.ndarray, basis: LieBasis) -> np.ndarray:
    return np.array([np.vdot(psi, apply_pauli(psi, p)).real for p in basis])


def correlation_matrix_dense(psi: np.ndarray, basis1: LieBasis, basis2: LieBasis | None = None) -> np.ndarray:
    basis2 = basis1 if basis2 is None else basis2
    left = np.array([apply_pauli(psi, p) for p in basis1])
    right = np.array([apply_pauli(psi, p) for p in basis2])
    # <B_a B_b> = (B_a psi)^dag (B_b psi)
    return (left.conj() @ right.T).real


def noisy_expectations_dense(rho: np.ndarray, basis: LieBasis) -> np.ndarray:
    return np.array([dm_expectation(rho, p) for p in basis])


__all__ = [
    "apply_pauli", "apply_pauli_rotation", "zero_state", "sv_evolve", "sv_expectation",
    "circuit_unitary", "dm_noisy_evolve", "dm_expectation", "hst_loss", "pauli_sum_sparse",
    "exact_ground_state", "power_iteration_ground_energy", "dense_adjoint",
    "expectation_vector_dense", "correlation_matrix_dense", "noisy_expectations_dense",
]  # fmt: skip
