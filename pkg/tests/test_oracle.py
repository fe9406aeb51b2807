import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from gsim import oracle
from gsim.circuits import Circuit, NoiseChannel
from gsim.lie import ResourceLimitError, adjoint_rep, chain_sum, g0_basis
from gsim.models import hva_tfxy_circuit, tfim_hamiltonian
from gsim.pauli import PauliString, PauliSum, parse_pauli


def random_state(n, rng):
    psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return psi / np.linalg.norm(psi)


# ---------------------------------------------------------------------------
# statevector


class TestStatevector:
    def test_identity_circuit(self):
        psi = random_state(3, np.random.default_rng(0))
        assert np.array_equal(oracle.sv_evolve(psi, Circuit(3), []), psi)

    def test_x_half_turn(self):
        c = Circuit(1)
        c.gate("X", angle=np.pi / 2)
        psi = oracle.sv_evolve(oracle.zero_state(1), c, [])
        assert np.allclose(psi, [0, -1j])

    def test_matches_dense_exponentials(self):
        rng = np.random.default_rng(1)
        c = hva_tfxy_circuit(3, 7)
        theta = rng.normal(size=7)
        psi = random_state(3, rng)
        ref = psi
        for g, t in zip(c.gates, theta):
            ref = expm(-1j * t * g.generator.to_matrix()) @ ref
        assert np.allclose(oracle.sv_evolve(psi, c, theta), ref)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_norm_preserved(self, seed):
        rng = np.random.default_rng(seed)
        c = hva_tfxy_circuit(4, 10)
        psi = oracle.sv_evolve(random_state(4, rng), c, rng.normal(size=10))
        assert np.linalg.norm(psi) == pytest.approx(1.0)

    def test_expectations(self):
        assert oracle.sv_expectation(oracle.zero_state(3), PauliSum.single(parse_pauli("Z2", 3))) == 1.0
        plus = np.full(2, 2**-0.5)
        assert oracle.sv_expectation(plus, PauliSum.single(parse_pauli("Z"))) == pytest.approx(0.0)

    def test_rejects_noise(self):
        c = Circuit(2)
        c.noise(NoiseChannel.depolarizing(2, 1, 0.1))
        with pytest.raises(ValueError):
            oracle.sv_evolve(oracle.zero_state(2), c, [])

    def test_size_cap(self):
        with pytest.raises(ResourceLimitError):
            oracle.sv_evolve(np.zeros(1), Circuit(oracle.MAX_SV_QUBITS + 1), [])


# ---------------------------------------------------------------------------
# density matrices


class TestDensityMatrix:
    @pytest.fixture
    def noisy_circuit(self):
        rng = np.random.default_rng(2)
        c = hva_tfxy_circuit(3, 7)
        c.noise(NoiseChannel.random_two_qubit(3, 1, 2, 0.3, rng))
        c.noise(NoiseChannel.depolarizing(3, 3, 0.2))
        return c, rng.normal(size=7)

    def test_identity_channel_is_unitary(self):
        rng = np.random.default_rng(3)
        c = hva_tfxy_circuit(3, 7)
        theta = rng.normal(size=7)
        noisy = Circuit(3)
        noisy.extend(c)
        noisy.noise(NoiseChannel([(1.0, PauliString.identity(3))]))
        psi = random_state(3, rng)
        rho = oracle.dm_noisy_evolve(np.outer(psi, psi.conj()), noisy, theta)
        out = oracle.sv_evolve(psi, c, theta)
        assert np.allclose(rho, np.outer(out, out.conj()))

    def test_trace_and_hermiticity(self, noisy_circuit):
        c, theta = noisy_circuit
        psi = random_state(3, np.random.default_rng(4))
        rho = oracle.dm_noisy_evolve(np.outer(psi, psi.conj()), c, theta)
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(rho, rho.conj().T, atol=1e-12)
        assert np.min(np.linalg.eigvalsh(rho)) > -1e-12

    def test_depolarizing_shrinks_z(self):
        c = Circuit(1)
        c.noise(NoiseChannel.depolarizing(1, 1, 0.3))
        rho = oracle.dm_noisy_evolve(np.diag([1.0, 0.0]), c, [])
        assert oracle.dm_expectation(rho, parse_pauli("Z")) == pytest.approx(1 - 4 * 0.3 / 3)


# ---------------------------------------------------------------------------
# Hilbert-Schmidt test


class TestHstLoss:
    @pytest.fixture
    def circuit6(self):
        rng = np.random.default_rng(5)
        c = hva_tfxy_circuit(6, 30)
        return c, rng.uniform(0, 2 * np.pi, 30)

    def test_self(self, circuit6):
        c, theta = circuit6
        assert oracle.hst_loss(c, theta, oracle.circuit_unitary(c, theta)) == pytest.approx(0.0, abs=1e-12)

    def test_global_phase(self, circuit6):
        c, theta = circuit6
        v = np.exp(0.7j) * oracle.circuit_unitary(c, theta)
        assert oracle.hst_loss(c, theta, v) == pytest.approx(0.0, abs=1e-12)

    def test_center_twisted_target(self, circuit6):
        # multiplying by Z^{(x)n} is invisible in the adjoint picture but not in the HST
        c, theta = circuit6
        zall = oracle.apply_pauli(np.eye(64, dtype=complex), PauliString.from_ops(6, {j: "Z" for j in range(1, 7)}))
        loss = oracle.hst_loss(c, theta, zall @ oracle.circuit_unitary(c, theta))
        assert loss > 0.5

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_in_unit_interval(self, seed):
        rng = np.random.default_rng(seed)
        c = hva_tfxy_circuit(3, 7)
        v = oracle.circuit_unitary(c, rng.normal(size=7))
        loss = oracle.hst_loss(c, rng.normal(size=7), v)
        assert -1e-12 <= loss <= 1 + 1e-12


# ---------------------------------------------------------------------------
# ground states and the dense adjoint map


class TestGroundState:
    def test_field_only(self):
        e, psi = oracle.exact_ground_state(chain_sum(5, "Z", coef=-1.0))
        assert e == pytest.approx(-5.0)
        assert abs(psi[0]) == pytest.approx(1.0)

    def test_tfim_matches_power_iteration(self):
        h = tfim_hamiltonian(4, h_xx=1.0, h_z=-1.0)
        e, _ = oracle.exact_ground_state(h)
        assert e == pytest.approx(oracle.power_iteration_ground_energy(h), abs=1e-6)

    def test_lanczos_branch_agrees(self):
        h = tfim_hamiltonian(9)
        e, _ = oracle.exact_ground_state(h)
        assert e == pytest.approx(oracle.power_iteration_ground_energy(h, iters=3000), abs=1e-6)

    def test_zero_hamiltonian(self):
        e, _ = oracle.exact_ground_state(PauliSum(3))
        assert e == 0.0


class TestDenseAdjoint:
    def test_matches_couplings(self):
        basis = g0_basis(3)
        for h in basis:
            assert np.allclose(oracle.dense_adjoint(PauliSum.single(h), basis), adjoint_rep(h, basis).dense())

    def test_commuting_is_zero(self):
        basis = g0_basis(3)
        assert np.allclose(oracle.dense_adjoint(PauliSum(3), basis), 0)
        # Z-type generators commute with every other Z-type basis string
        z_rows = [basis.index_of(parse_pauli(f"Z{j}", 3)) for j in (1, 2, 3)]
        m = oracle.dense_adjoint(chain_sum(3, "Z"), basis)
        assert np.allclose(m[z_rows], 0)

    def test_purely_imaginary(self):
        basis = g0_basis(2)
        h = PauliSum(2, [(0.4, parse_pauli("XX")), (-1.1, parse_pauli("IZ"))])
        m = oracle.dense_adjoint(h, basis)
        assert np.allclose(m.real, 0) and np.allclose(m, m.conj().T)

    def test_size_cap(self):
        with pytest.raises(ResourceLimitError):
            oracle.dense_adjoint(PauliSum(7), g0_basis(7))
