import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from gsim import oracle
from gsim.lie import chain_sum, g0_basis
from gsim.models import (
    GraphError, check_simple_graph, hs1_norm, hva_tfxy_circuit, hva_tfxy_layer, layered_circuit, ltfim_hamiltonian,
    max_cut_value, overparametrized_layers, qaoa_path_circuit, random_algebra_hamiltonian, random_fields,
    random_graph, tfim_hamiltonian, tfxy_even_ground_energy, tfxy_hamiltonian, two_local_circuit, two_local_layer, utfim_circuit,
)  # fmt: skip
from gsim.pauli import PauliString, PauliSum, parse_pauli, weight
from gsim.statevector import cut_levels


def brute_max_cut(n, edges):
    best = 0
    for bits in itertools.product((0, 1), repeat=n):
        best = max(best, sum(bits[a - 1] != bits[b - 1] for a, b in edges))
    return best


# ---------------------------------------------------------------------------
# Hamiltonians


class TestHamiltonians:
    @pytest.mark.parametrize("n, xi, seed", [(2, 0.0, 0), (3, 1.0, 1), (6, 0.1, 2), (8, 1.0, 0), (9, 2.0, 3)])
    def test_even_ground_energy_matches_dense(self, n, xi, seed):
        b = random_fields(n, xi, np.random.default_rng(seed))
        even = np.bitwise_count(np.arange(2**n)).astype(np.int64) % 2 == 0
        dense = np.linalg.eigvalsh(tfxy_hamiltonian(n, b).to_matrix()[np.ix_(even, even)])[0]
        assert tfxy_even_ground_energy(b) == pytest.approx(dense, abs=1e-10)

    def test_tfxy_terms(self):
        h = tfxy_hamiltonian(4, [0.1, 0.2, 0.3, 0.4])
        assert len(h) == 3 + 3 + 4
        assert h.coefficient(parse_pauli("Z3", 4)) == 0.3

    def test_tfim_and_ltfim(self):
        h = ltfim_hamiltonian(3, h_xx=2.0, h_z=-0.5, h_x=0.25)
        assert h.coefficient(parse_pauli("X1 X2", 3)) == 2.0
        assert h.coefficient(parse_pauli("Z2", 3)) == -0.5
        assert h.coefficient(parse_pauli("X3", 3)) == 0.25
        assert len(tfim_hamiltonian(3)) == 5

    def test_hs1_norm(self):
        h = PauliSum(2, [(3.0, parse_pauli("XX")), (4.0, parse_pauli("ZI")), (9.0, PauliString.identity(2))])
        assert hs1_norm(h) == pytest.approx(5.0)
        m = h.to_matrix() - 9.0 * np.eye(4)
        assert hs1_norm(h) == pytest.approx(np.sqrt(np.trace(m @ m).real / 4))

    def test_random_fields(self):
        assert np.array_equal(random_fields(5, 0.0, np.random.default_rng(0)), np.zeros(5))
        b = random_fields(20000, 2.0, np.random.default_rng(0))
        assert b.std() == pytest.approx(2.0, rel=0.03)


class TestRandomTargets:
    def test_unit_norm(self):
        h = random_algebra_hamiltonian(g0_basis(5), np.random.default_rng(0))
        assert h.norm() == pytest.approx(1.0)
        assert len(h) == g0_basis(5).dim

    def test_two_local(self):
        h = random_algebra_hamiltonian(g0_basis(6), np.random.default_rng(1), max_weight=2)
        assert all(weight(p) <= 2 for _, p in h.terms())
        assert len(h) == 6 + 4 * 5

    def test_empty_filter(self):
        with pytest.raises(ValueError):
            random_algebra_hamiltonian(g0_basis(3), np.random.default_rng(0), max_weight=0)


# ---------------------------------------------------------------------------
# ansatz builders


class TestAnsatze:
    @pytest.mark.parametrize("n", [2, 5, 9])
    def test_layer_sizes(self, n):
        assert len(hva_tfxy_layer(n)) == 3 * n - 2
        assert len(two_local_layer(n)) == 5 * n - 4

    def test_partial_layers(self):
        c = hva_tfxy_circuit(4, 13)
        assert c.n_params == 13
        assert [g.generator.terms()[0][1] for g in c.gates[10:]] == hva_tfxy_layer(4)[:3]

    def test_layered_circuit_repeats(self):
        c = layered_circuit(3, [parse_pauli("ZII"), parse_pauli("XXI")], 5)
        labels = [g.generator.terms()[0][1].label() for g in c.gates]
        assert labels == ["ZII", "XXI", "ZII", "XXI", "ZII"]

    def test_two_local_circuit(self):
        assert two_local_circuit(4, 3).n_params == 3 * 16

    def test_overparametrized_layers(self):
        # n = 6: dim 66, layer of 26 gates, 2 x 66 = 132 -> 6 layers (156 gates)
        assert overparametrized_layers(6, 26) == 6

    def test_utfim_parameter_count(self):
        assert utfim_circuit(5, 4).n_params == 8
        assert utfim_circuit(5, 4, with_longitudinal=True).n_params == 12

    def test_qaoa_path_matches_computational_frame(self):
        # the Hadamard-frame circuit on |0...0> reproduces QAOA on |+...+> with ZZ cost and X mixer
        n, p = 4, 3
        rng = np.random.default_rng(3)
        theta = rng.normal(size=2 * p)
        edges = [(j, j + 1) for j in range(1, n)]
        cut = cut_levels(n, edges)
        mixer = chain_sum(n, "X").to_matrix()
        psi = np.full(2**n, 2 ** (-n / 2), dtype=complex)
        for k in range(p):
            # 1/2 sum Z Z = (n - 1) / 2 - cut, so the cost gate is a cut phase up to a global phase
            psi = np.exp(1j * theta[2 * k] * cut) * psi
            psi = expm(-1j * theta[2 * k + 1] * mixer) @ psi
        frame = oracle.sv_evolve(oracle.zero_state(n), qaoa_path_circuit(n, p), theta)
        half_xx = oracle.sv_expectation(frame, chain_sum(n, "X", "X", coef=0.5))
        assert (n - 1) / 2 - half_xx == pytest.approx(np.vdot(psi, cut * psi).real, abs=1e-10)


# ---------------------------------------------------------------------------
# graphs


class TestGraphs:
    def test_normalizes(self):
        assert check_simple_graph(3, [(2, 1), (3, 2)]) == [(1, 2), (2, 3)]

    @pytest.mark.parametrize("edges", [[(1, 1)], [(1, 2), (2, 1)], [(0, 1)], [(1, 4)], []])
    def test_rejects(self, edges):
        with pytest.raises(GraphError):
            check_simple_graph(3, edges)

    def test_regular3(self):
        edges = random_graph(10, "regular3", seed=4)
        degree = np.bincount(np.array(edges).ravel(), minlength=11)[1:]
        assert np.all(degree == 3)

    def test_deterministic(self):
        assert random_graph(12, "erdos_renyi", seed=7) == random_graph(12, "erdos_renyi", seed=7)

    def test_unknown_ensemble(self):
        with pytest.raises(ValueError):
            random_graph(6, "lattice", seed=0)

    def test_single_edge_cut(self):
        assert max_cut_value(2, [(1, 2)]) == 1

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_max_cut_matches_brute_force(self, seed):
        edges = random_graph(8, "erdos_renyi", seed, edge_prob=0.4)
        assert max_cut_value(8, edges) == brute_max_cut(8, edges)
