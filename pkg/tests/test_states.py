import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gsim import oracle
from gsim.lie import ResourceLimitError, g0_basis
from gsim.pauli import PauliSizeError, parse_pauli
from gsim.states import StateSpec, correlation_matrix, expectation_vector, ket_index, vector_to_csv


def random_kets(rng, n):
    kets = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
    return kets / np.linalg.norm(kets, axis=1, keepdims=True)


@pytest.fixture(scope="module")
def basis4():
    return g0_basis(4)


@pytest.fixture(scope="module")
def basis8():
    return g0_basis(8)


# ---------------------------------------------------------------------------
# constructors


class TestStateSpec:
    def test_ket_index_is_little_endian(self):
        assert ket_index("100") == 1 and ket_index("001") == 4

    def test_computational_statevector(self):
        psi = StateSpec.computational("110").statevector()
        assert psi[ket_index("110")] == 1 and np.count_nonzero(psi) == 1

    def test_rejects_bad_bits(self):
        with pytest.raises(ValueError):
            StateSpec.computational("012")

    def test_rejects_unnormalized_block(self):
        with pytest.raises(ValueError):
            StateSpec.product([np.array([1.0, 1.0])])

    def test_block_size_cap(self):
        amps = np.zeros(1 << 13)
        amps[0] = 1
        with pytest.raises(ResourceLimitError):
            StateSpec.block_product(amps, 1)

    def test_magic_needs_multiple_of_four(self):
        with pytest.raises(ValueError):
            StateSpec.magic(6, 1.0)

    def test_magic_block_amplitudes(self):
        psi = StateSpec.magic(4, np.pi).statevector()
        assert psi[ket_index("0011")] == pytest.approx(0.5)
        assert psi[ket_index("1111")] == pytest.approx(-0.5)
        assert np.linalg.norm(psi) == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# expectation vectors


class TestExpectationVector:
    def test_zero_state(self, basis4):
        e = expectation_vector(StateSpec.zeros(4), basis4)
        z_idx = [basis4.index_of(parse_pauli(f"Z{j}", 4)) for j in range(1, 5)]
        assert np.all(e[z_idx] == 1)
        others = np.delete(e, z_idx)
        assert np.all(others == 0)

    def test_plus_state_has_no_z(self, basis4):
        e = expectation_vector(StateSpec.plus_all(4), basis4)
        for j in range(1, 5):
            assert e[basis4.index_of(parse_pauli(f"Z{j}", 4))] == pytest.approx(0.0)

    def test_magic_matches_dense(self, basis8):
        spec = StateSpec.magic(8, 2.81)
        ref = oracle.expectation_vector_dense(spec.statevector(), basis8)
        assert np.allclose(expectation_vector(spec, basis8), ref, atol=1e-12)

    def test_random_product_matches_dense(self, basis4):
        spec = StateSpec.product(random_kets(np.random.default_rng(5), 4))
        ref = oracle.expectation_vector_dense(spec.statevector(), basis4)
        assert np.allclose(expectation_vector(spec, basis4), ref, atol=1e-12)

    def test_size_mismatch(self, basis4):
        with pytest.raises(PauliSizeError):
            expectation_vector(StateSpec.zeros(5), basis4)

    def test_large_n_is_cheap(self):
        basis = g0_basis(100)
        e = expectation_vector(StateSpec.zeros(100), basis)
        assert e.sum() == 100

    def test_csv_export(self, basis4):
        text = vector_to_csv(expectation_vector(StateSpec.zeros(4), basis4), basis4)
        lines = text.splitlines()
        assert lines[0] == "index,pauli_string,value"
        assert len(lines) == basis4.dim + 1

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_entries_bounded(self, seed):
        basis = g0_basis(3)
        e = expectation_vector(StateSpec.product(random_kets(np.random.default_rng(seed), 3)), basis)
        assert np.all(np.abs(e) <= 1 + 1e-12)


# ---------------------------------------------------------------------------
# correlation matrices


class TestCorrelationMatrix:
    def test_zero_state_entries(self, basis4):
        E = correlation_matrix(StateSpec.zeros(4), basis4)
        z1, z2 = (basis4.index_of(parse_pauli(f"Z{j}", 4)) for j in (1, 2))
        assert E[z1, z2] == 1 and E[z1, z1] == 1

    def test_diagonal_is_one(self, basis4):
        E = correlation_matrix(StateSpec.magic(4, 0.3), basis4)
        assert np.allclose(np.diag(E), 1.0)

    def test_magic_matches_dense(self, basis8):
        spec = StateSpec.magic(8, 2.81)
        ref = oracle.correlation_matrix_dense(spec.statevector(), basis8)
        assert np.allclose(correlation_matrix(spec, basis8), ref, atol=1e-12)

    def test_chunking_does_not_change_result(self, basis4):
        spec = StateSpec.product(random_kets(np.random.default_rng(9), 4))
        assert np.array_equal(correlation_matrix(spec, basis4), correlation_matrix(spec, basis4, chunk=7))

    def test_symmetric(self, basis4):
        E = correlation_matrix(StateSpec.product(random_kets(np.random.default_rng(2), 4)), basis4)
        assert np.allclose(E, E.T, atol=1e-12)
