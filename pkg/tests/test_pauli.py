import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gsim.pauli import (
    PauliSizeError, PauliString, PauliSum, commutator, commutes, multiply, parse_pauli, pauli_matrix, weight,
)  # fmt: skip


def P(label, n=None):
    return parse_pauli(label, n)


def all_strings(n):
    return [P("".join(t)) for t in itertools.product("IXYZ", repeat=n)]


@st.composite
def pauli_strings(draw, n=None):
    n = n or draw(st.integers(1, 4))
    return P("".join(draw(st.lists(st.sampled_from("IXYZ"), min_size=n, max_size=n))))


# ---------------------------------------------------------------------------
# construction and parsing


class TestParsing:
    def test_dense_label_roundtrip(self):
        p = P("XIZY")
        assert p.label() == "XIZY"
        assert p.n == 4

    def test_sparse_label(self):
        assert P("X1 Z3", 3) == P("XIZ")

    def test_sparse_label_needs_size(self):
        with pytest.raises(ValueError):
            P("X1 Z3")

    @pytest.mark.parametrize("bad", ["XQ", "A1", "X1 X1"])
    def test_rejects_malformed(self, bad):
        with pytest.raises(ValueError):
            P(bad, 2)

    def test_qubit_one_is_lowest_bit(self):
        p = PauliString.single(3, "X", 1)
        assert p.x_mask == 1 and p.z_mask == 0

    def test_y_sets_both_masks(self):
        p = PauliString.single(2, "Y", 2)
        assert p.x_mask == p.z_mask == 2

    def test_large_n(self):
        p = PauliString.from_ops(256, {1: "X", 256: "Y"})
        assert weight(p) == 2 and p.op(256) == "Y"


# ---------------------------------------------------------------------------
# products


class TestMultiply:
    def test_x_times_z(self):
        r = multiply(P("X"), P("Z"))
        assert r.string == P("Y") and r.phase == -1j

    def test_identity(self):
        p = P("XYZ")
        r = multiply(p, P("III"))
        assert r.string == p and r.phase == 1

    def test_two_sites(self):
        r = multiply(P("XY"), P("YY"))
        assert r.string == P("ZI") and r.phase == 1j

    def test_size_mismatch(self):
        with pytest.raises(PauliSizeError):
            multiply(P("X"), P("XX"))

    @pytest.mark.parametrize("n", [1, 2])
    def test_matches_dense_matrices(self, n):
        for p, q in itertools.product(all_strings(n), repeat=2):
            r = multiply(p, q)
            assert np.allclose(pauli_matrix(p) @ pauli_matrix(q), r.phase * pauli_matrix(r.string))

    def test_associative_with_phases(self):
        strings = all_strings(2)
        for p, q, r in itertools.product(strings, repeat=3):
            a = multiply(p, q)
            left = multiply(a.string, r)
            b = multiply(q, r)
            right = multiply(p, b.string)
            assert left.string == right.string
            assert a.phase * left.phase == b.phase * right.phase

    @settings(max_examples=200, deadline=None)
    @given(st.data())
    def test_phase_is_fourth_root(self, data):
        n = data.draw(st.integers(1, 5))
        p, q = data.draw(pauli_strings(n)), data.draw(pauli_strings(n))
        assert multiply(p, q).phase in (1, -1, 1j, -1j)


# ---------------------------------------------------------------------------
# commutation


class TestCommutation:
    @pytest.mark.parametrize(
        "p, q, expected", [("X", "Z", False), ("X", "X", True), ("XX", "ZZ", True)]
    )  # fmt: skip
    def test_commutes(self, p, q, expected):
        assert commutes(P(p), P(q)) is expected

    def test_commutator_xz(self):
        assert commutator(P("X"), P("Z")) == (-1, P("Y"))

    def test_commutator_of_equal_strings(self):
        assert commutator(P("X"), P("X")) is None

    def test_commutator_on_second_site(self):
        assert commutator(P("XX"), P("IZ")) == (-1, P("XY"))

    def test_none_iff_commutes_exhaustive(self):
        for p, q in itertools.product(all_strings(3), repeat=2):
            assert (commutator(p, q) is None) == commutes(p, q)

    def test_antisymmetry(self):
        for p, q in itertools.product(all_strings(2), repeat=2):
            c = commutator(p, q)
            if c is not None:
                s, r = commutator(q, p)
                assert s == -c[0] and r == c[1]

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_matches_dense_commutator(self, n):
        strings = all_strings(n)
        for p, q in itertools.product(strings, strings[:: max(1, len(strings) // 16)]):
            mp, mq = pauli_matrix(p), pauli_matrix(q)
            c = commutator(p, q)
            expected = np.zeros_like(mp) if c is None else 2j * c[0] * pauli_matrix(c[1])
            assert np.allclose(mp @ mq - mq @ mp, expected)


class TestWeight:
    @pytest.mark.parametrize("label, w", [("III", 0), ("XZI", 2), ("XZZX", 4)])
    def test_weight(self, label, w):
        assert weight(P(label)) == w


# ---------------------------------------------------------------------------
# sums


class TestPauliSum:
    def test_merges_and_drops_zero(self):
        h = PauliSum(2, [(1.0, P("XX")), (-1.0, P("XX")), (0.5, P("ZI"))])
        assert len(h) == 1 and h.coefficient(P("ZI")) == 0.5

    def test_norm(self):
        h = PauliSum(2, [(3.0, P("XX")), (4.0, P("ZI"))])
        assert h.norm() == pytest.approx(5.0)

    def test_matrix_is_hermitian(self):
        h = PauliSum(2, [(0.3, P("XY")), (-1.2, P("ZZ")), (0.7, P("IY"))])
        m = h.to_matrix()
        assert np.allclose(m, m.conj().T)

    def test_without_identity(self):
        h = PauliSum(2, [(2.0, P("II")), (1.0, P("XX"))])
        rest, const = h.without_identity()
        assert const == 2.0 and len(rest) == 1
