import numpy as np
import pytest

from gsim import oracle
from gsim.lie import (
    InvarianceError, LieBasis, ResourceLimitError, adjoint_rep, adjoint_rep_sum, chain_sum, dense_generator,
    g0_basis, g0_generators, lie_closure_pauli, lie_closure_span, majorana_basis, tfim_generators, xy_generators,
)  # fmt: skip
from gsim.pauli import PauliString, PauliSum, commutator, parse_pauli, pauli_matrix


def P(label, n=None):
    return parse_pauli(label, n)


def dense_closure_dim(gens) -> int:
    """Dimension of the real Lie closure, by rank of flattened dense matrices."""
    flat = lambda m: np.concatenate([m.real.ravel(), m.imag.ravel()])  # noqa: E731
    kept, rows = [], []
    queue = [pauli_matrix(g) for g in gens]
    while queue:
        m = queue.pop()
        if np.linalg.matrix_rank(np.array(rows + [flat(m)]), tol=1e-9) > len(rows):
            rows.append(flat(m))
            queue += [m @ k - k @ m for k in kept]
            kept.append(m)
    return len(rows)


@pytest.fixture(scope="module")
def g0_2():
    return g0_basis(2)


@pytest.fixture(scope="module")
def g0_4():
    return g0_basis(4)


# ---------------------------------------------------------------------------
# closures


class TestClosurePauli:
    @pytest.mark.parametrize("n", range(2, 9))
    def test_g0_dimension(self, n):
        assert lie_closure_pauli(g0_generators(n)).dim == n * (2 * n - 1)

    def test_g0_n3_contains_dressed_pair(self):
        basis = lie_closure_pauli(g0_generators(3))
        assert basis.dim == 15
        assert P("XZX") in basis

    def test_abelian_singleton(self):
        assert lie_closure_pauli([P("Z")]).dim == 1

    def test_xx_and_z_at_two_qubits(self):
        # {XX, ZI, YX} closes into su(2); the dense closure below agrees
        basis = lie_closure_pauli([P("XX"), P("ZI")])
        assert basis.dim == dense_closure_dim([P("XX"), P("ZI")]) == 3

    @pytest.mark.parametrize("labels", [["XX", "YY", "ZI"], ["XY", "ZI", "IZ"], ["XIZ", "ZXI", "IIY"]])
    def test_matches_dense_closure(self, labels):
        gens = [P(s) for s in labels]
        assert lie_closure_pauli(gens).dim == dense_closure_dim(gens)

    def test_idempotent(self):
        basis = lie_closure_pauli(g0_generators(4))
        again = lie_closure_pauli(list(basis))
        assert set(again) == set(basis)

    def test_cap(self):
        # X, Z and ZZ-type generators on a chain generate an exponential algebra
        labels = ["XIII", "IXII", "IIXI", "IIIX", "ZZII", "IZZI", "IIZZ", "ZIII", "IZII"]
        gens = [P(s) for s in labels]
        assert lie_closure_pauli(gens).dim == 255  # all of su(16)
        with pytest.raises(ResourceLimitError):
            lie_closure_pauli(gens, cap=100)

    def test_closed_under_commutators(self):
        basis = lie_closure_pauli(g0_generators(3))
        for p in basis:
            for q in basis:
                c = commutator(p, q)
                assert c is None or c[1] in basis


class TestClosureSpan:
    @pytest.mark.parametrize("n", range(2, 7))
    def test_tfim_dimension(self, n):
        assert len(lie_closure_span(tfim_generators(n))) == n * n

    @pytest.mark.parametrize("n", range(2, 7))
    def test_xy_dimension(self, n):
        assert len(lie_closure_span([PauliSum.single(p) for p in xy_generators(n)])) == n * (n - 1)

    def test_xy_agrees_with_pauli_closure(self):
        assert lie_closure_pauli(xy_generators(5)).dim == 20

    def test_qaoa_path_is_isomorphic_to_tfim(self):
        from gsim.lie import qaoa_path_generators

        assert len(lie_closure_span(qaoa_path_generators(4))) == 16

    def test_single_element(self):
        assert len(lie_closure_span([chain_sum(3, "Z")])) == 1

    def test_orthonormal(self):
        span = lie_closure_span(tfim_generators(3))
        gram = np.array([[sum(a.coefficient(p) * c for c, p in b.terms()) for b in span] for a in span])
        assert np.allclose(gram, np.eye(len(span)), atol=1e-10)


# ---------------------------------------------------------------------------
# predefined bases


class TestG0Basis:
    def test_n2_elements(self, g0_2):
        assert set(g0_2) == {P(s) for s in ("ZI", "IZ", "XX", "YY", "XY", "YX")}

    def test_n3_contains_dressed_pair(self):
        basis = g0_basis(3)
        assert basis.dim == 15 and P("XZX") in basis

    @pytest.mark.parametrize("n", range(2, 7))
    def test_equals_closure(self, n):
        assert set(g0_basis(n)) == set(lie_closure_pauli(g0_generators(n)))

    def test_rejects_single_qubit(self):
        with pytest.raises(ValueError):
            g0_basis(1)

    def test_deterministic_order(self):
        assert g0_basis(4).elements == g0_basis(4).elements
        assert g0_basis(4)[0] == PauliString.single(4, "Z", 1)

    def test_large_n_lookup(self):
        basis = g0_basis(70)
        p = PauliString.from_ops(70, {1: "X", **{q: "Z" for q in range(2, 70)}, 70: "Y"})
        assert basis.dim == 70 * 139
        assert basis[basis.index_of(p)] == p

    def test_majorana_basis_is_invariant(self):
        basis = majorana_basis(4)
        for h in g0_generators(4):
            adjoint_rep(h, basis)  # raises when a commutator leaves the span


class TestLieBasis:
    def test_rejects_duplicates(self):
        with pytest.raises(ValueError):
            LieBasis([P("XX"), P("XX")])

    def test_weights_and_constant(self, g0_2):
        h = PauliSum(2, [(0.5, P("XX")), (2.0, P("II")), (-1.0, P("ZI"))])
        w, const = g0_2.weights(h)
        assert const == 2.0
        assert w[g0_2.index_of(P("XX"))] == 0.5 and w[g0_2.index_of(P("ZI"))] == -1.0

    def test_weights_outside_basis(self, g0_2):
        with pytest.raises(InvarianceError):
            g0_2.weights(PauliSum.single(P("XI")))

    def test_weight_array(self):
        basis = g0_basis(3)
        w = basis.weight_array()
        assert w[basis.index_of(P("XZX"))] == 3 and w[basis.index_of(P("ZII"))] == 1


# ---------------------------------------------------------------------------
# adjoint representation


class TestAdjointRep:
    def test_z1_on_two_qubits(self, g0_2):
        gen = adjoint_rep(P("ZI"), g0_2)
        pairs = {frozenset((g0_2[a], g0_2[b])) for a, b, _ in gen.couplings}
        assert pairs == {frozenset((P("XX"), P("YX"))), frozenset((P("XY"), P("YY")))}
        assert np.all(np.abs(gen.antisymmetric()[gen.alpha, gen.beta]) == 2)

    def test_identity_has_no_couplings(self, g0_2):
        assert len(adjoint_rep(P("II"), g0_2)) == 0

    def test_eigenvalues_are_plus_minus_two(self, g0_4):
        for h in list(g0_4)[::5]:
            ev = np.linalg.eigvalsh(adjoint_rep(h, g0_4).dense())
            nz = ev[np.abs(ev) > 1e-9]
            assert np.allclose(np.abs(nz), 2)

    @pytest.mark.parametrize("n", [2, 3])
    def test_matches_trace_formula(self, n):
        basis = g0_basis(n)
        for h in basis:
            ref = oracle.dense_adjoint(PauliSum.single(h), basis)
            assert np.allclose(adjoint_rep(h, basis).dense(), ref)

    def test_invariance_violation(self, g0_2):
        with pytest.raises(InvarianceError):
            adjoint_rep(P("XI"), g0_2)

    def test_faithful(self, g0_4):
        assert all(len(adjoint_rep(h, g0_4)) > 0 for h in g0_4)

    def test_sparsity(self, g0_4):
        assert all(len(adjoint_rep(h, g0_4)) <= g0_4.dim for h in g0_4)

    def test_homomorphism(self, g0_4):
        rng = np.random.default_rng(3)
        for _ in range(40):
            a, b = rng.integers(g0_4.dim, size=2)
            ga, gb = g0_4[int(a)], g0_4[int(b)]
            ma, mb = adjoint_rep(ga, g0_4).dense(), adjoint_rep(gb, g0_4).dense()
            c = commutator(ga, gb)
            expected = np.zeros_like(ma) if c is None else 2j * c[0] * adjoint_rep(c[1], g0_4).dense()
            assert np.allclose(ma @ mb - mb @ ma, expected)


class TestAdjointRepSum:
    def test_linearity(self, g0_2):
        terms = adjoint_rep_sum(chain_sum(2, "Z"), g0_2)
        assert [c for c, _ in terms] == [1.0, 1.0]

    def test_zero(self, g0_2):
        assert adjoint_rep_sum(PauliSum(2), g0_2) == []

    def test_dense_sum_matches_trace_formula(self, g0_2):
        h = PauliSum(2, [(0.3, P("XX")), (-0.7, P("ZI")), (1.1, P("YX"))])
        assert np.allclose(1j * dense_generator(h, g0_2), oracle.dense_adjoint(h, g0_2))
