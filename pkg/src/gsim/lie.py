"""Lie closures, indexed Pauli bases and sparse adjoint generators.

A :class:`LieBasis` is an ordered list of distinct Pauli strings spanning an
operator subspace that is invariant under the circuit's conjugation action.
Since distinct Pauli strings are orthonormal under ``Tr[A B] / 2**n``, the
basis needs no further normalization.

Sign convention of the adjoint generator.  For a Pauli generator ``H`` and a
basis element ``B_a`` that anticommutes with it, ``[H, B_a] = 2i s B_b``.  The
conjugation ``U^dag B_a U`` for ``U = exp(-i theta H)`` then equals
``cos(2 theta) B_a - s sin(2 theta) B_b``, which is the Givens rotation applied
by the evolution kernels.  The matching dense matrix is
``Hbar[a, b] = -Tr[B_b [H, B_a]] / 2**n = -2i s`` so that ``expm(-i theta Hbar)``
reproduces the same rotation.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .pauli import PauliString, PauliSum, commutator

DEFAULT_CLOSURE_CAP = 20_000
SPAN_TOLERANCE = 1e-10

_MASK64 = (1 << 64) - 1
_HASH_RNG = np.random.default_rng(0x5EED)


class ResourceLimitError(RuntimeError):
    """A closure or dense object would exceed its configured size cap."""


class InvarianceError(ValueError):
    """Conjugation by a generator leaves the basis span."""


def _to_words(values: Sequence[int], n_words: int) -> np.ndarray:
    out = np.empty((len(values), n_words), dtype=np.uint64)
    for w in range(n_words):
        shift = 64 * w
        out[:, w] = [(v >> shift) & _MASK64 for v in values]
    return out


def _int_to_words(value: int, n_words: int) -> np.ndarray:
    return np.array([(value >> (64 * w)) & _MASK64 for w in range(n_words)], dtype=np.uint64)


def _popcount_rows(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a).sum(axis=-1, dtype=np.int64)


class LieBasis:
    """Ordered, indexed Pauli basis with vectorized mask storage."""

    def __init__(self, elements: Iterable[PauliString], n: int | None = None):
        self.elements: tuple[PauliString, ...] = tuple(elements)
        if not self.elements and n is None:
            raise ValueError("empty basis needs an explicit qubit count")
        self.n = self.elements[0].n if n is None else n
        self.index: dict[PauliString, int] = {}
        for i, p in enumerate(self.elements):
            if p.n != self.n:
                raise ValueError("basis elements must share the qubit count")
            if p in self.index:
                raise ValueError(f"duplicate basis element {p.sparse_label()}")
            self.index[p] = i
        self.n_words = max(1, (self.n + 63) // 64)
        self.x_words = _to_words([p.x_mask for p in self.elements], self.n_words)
        self.z_words = _to_words([p.z_mask for p in self.elements], self.n_words)
        self._salt = _HASH_RNG.integers(1, 2**63, size=(2, self.n_words), dtype=np.uint64) | np.uint64(1)
        keys = self._hash(self.x_words, self.z_words)
        order = np.argsort(keys, kind="stable")
        self._sorted_keys = keys[order]
        self._sorted_pos = order
        self._adjoint_cache: dict[PauliString, AdjointGenerator] = {}
        self._support_cache: dict[tuple[int, ...], tuple[np.ndarray, np.ndarray]] = {}

    def _hash(self, xw: np.ndarray, zw: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore"):
            return (xw * self._salt[0]).sum(axis=-1, dtype=np.uint64) ^ (
                (zw * self._salt[1]).sum(axis=-1, dtype=np.uint64) * np.uint64(0x9E3779B97F4A7C15)
            )

    def lookup_words(self, xw: np.ndarray, zw: np.ndarray) -> np.ndarray:
        """Vectorized index lookup; returns -1 where the string is absent."""
        keys = self._hash(xw, zw)
        pos = np.searchsorted(self._sorted_keys, keys)
        pos = np.minimum(pos, len(self._sorted_keys) - 1)
        out = np.full(len(keys), -1, dtype=np.int64)
        if len(self._sorted_keys) == 0:
            return out
        # walk forward over (rare) hash collisions
        while True:
            cand = self._sorted_pos[pos]
            hit = (self._sorted_keys[pos] == keys) & np.all(self.x_words[cand] == xw, axis=-1) & np.all(
                self.z_words[cand] == zw, axis=-1
            )
            out = np.where((out < 0) & hit, cand, out)
            nxt = pos + 1
            more = (out < 0) & (nxt < len(self._sorted_keys))
            more &= self._sorted_keys[np.minimum(nxt, len(self._sorted_keys) - 1)] == keys
            if not more.any():
                return out
            pos = np.where(more, nxt, pos)

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def dim(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i: int) -> PauliString:
        return self.elements[i]

    def __contains__(self, p: PauliString) -> bool:
        return p in self.index

    def index_of(self, p: PauliString | str) -> int:
        if isinstance(p, str):
            p = PauliString.from_label(p, self.n)
        return self.index[p]

    def weights(self, op: PauliSum) -> tuple[np.ndarray, float]:
        """Coordinates of ``op`` in this basis plus its identity coefficient."""
        w = np.zeros(self.dim)
        const = 0.0
        for c, p in op.terms():
            if p.is_identity:
                const += c
                continue
            i = self.index.get(p)
            if i is None:
                raise InvarianceError(f"{p.sparse_label()} is not in the basis")
            w[i] += c
        return w, const

    def unit(self, p: PauliString | str) -> np.ndarray:
        w = np.zeros(self.dim)
        w[self.index_of(p)] = 1.0
        return w

    def weight_array(self) -> np.ndarray:
        return _popcount_rows(self.x_words | self.z_words)

    def adjoint(self, h: PauliString) -> "AdjointGenerator":
        """Cached :func:`adjoint_rep` of ``h`` on this basis."""
        gen = self._adjoint_cache.get(h)
        if gen is None:
            gen = adjoint_rep(h, self)
            self._adjoint_cache[h] = gen
        return gen

    def support_classes(self, qubits: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
        """Elements acting non-trivially on ``qubits`` and their local codes.

        The code of an element is ``sum_k (2 x_k + z_k) 4**k`` over the listed
        (1-indexed) qubits, i.e. its restriction to those sites.
        """
        hit = self._support_cache.get(qubits)
        if hit is not None:
            return hit
        code = np.zeros(self.dim, dtype=np.int64)
        for k, q in enumerate(qubits):
            w, b = divmod(q - 1, 64)
            xb = (self.x_words[:, w] >> np.uint64(b)) & np.uint64(1)
            zb = (self.z_words[:, w] >> np.uint64(b)) & np.uint64(1)
            code += (2 * xb.astype(np.int64) + zb.astype(np.int64)) << (2 * k)
        idx = np.nonzero(code)[0].astype(np.int64)
        hit = (idx, code[idx].astype(np.int32))
        self._support_cache[qubits] = hit
        return hit

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["index", "pauli_string"])
        for i, p in enumerate(self.elements):
            wr.writerow([i, p.label()])
        return buf.getvalue()

    def __repr__(self):
        return f"LieBasis(n={self.n}, dim={self.dim})"


@dataclass(frozen=True)
class AdjointGenerator:
    """Sparse adjoint action of a Pauli generator on a basis.

    ``alpha[k] < beta[k]`` with ``[H, B_alpha] = 2i sign[k] B_beta``.
    """

    generator: PauliString
    dim: int
    alpha: np.ndarray
    beta: np.ndarray
    sign: np.ndarray = field(repr=False)

    @property
    def couplings(self) -> list[tuple[int, int, int]]:
        return list(zip(self.alpha.tolist(), self.beta.tolist(), self.sign.tolist()))

    def __len__(self):
        return len(self.alpha)

    def antisymmetric(self) -> np.ndarray:
        """Real antisymmetric ``K = -i Hbar`` with ``exp(theta K)`` the gate rotation."""
        k = np.zeros((self.dim, self.dim))
        k[self.alpha, self.beta] = -2.0 * self.sign
        k[self.beta, self.alpha] = 2.0 * self.sign
        return k

    def dense(self) -> np.ndarray:
        """Purely imaginary Hermitian matrix ``Hbar``."""
        return 1j * self.antisymmetric()

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["alpha", "beta", "sign"])
        wr.writerows(self.couplings)
        return buf.getvalue()


def adjoint_rep(h: PauliString, basis: LieBasis) -> AdjointGenerator:
    if h.n != basis.n:
        raise ValueError(f"generator on {h.n} qubits, basis on {basis.n}")
    nw = basis.n_words
    hx, hz = _int_to_words(h.x_mask, nw), _int_to_words(h.z_mask, nw)
    bx, bz = basis.x_words, basis.z_words
    anti = (_popcount_rows((bx & hz) ^ (bz & hx)) & 1).astype(bool)
    a = np.nonzero(anti)[0]
    empty = np.zeros(0, dtype=np.int64)
    if len(a) == 0:
        return AdjointGenerator(h, basis.dim, empty, empty, np.zeros(0, dtype=np.int8))
    ax, az = bx[a], bz[a]
    rx, rz = ax ^ hx, az ^ hz
    b = basis.lookup_words(rx, rz)
    if np.any(b < 0):
        bad = basis.elements[int(a[np.argmax(b < 0)])]
        raise InvarianceError(
            f"[{h.sparse_label()}, {bad.sparse_label()}] leaves the basis span"
        )
    # phase of H * B_a is i**k with k = 1 or 3; the sign of [H, B_a] follows
    k = (
        (h.x_mask & h.z_mask).bit_count()
        + _popcount_rows(ax & az)
        + 2 * _popcount_rows(hz & ax)
        - _popcount_rows(rx & rz)
    )
    k = np.mod(k, 4)
    s = np.where(k == 1, 1, -1).astype(np.int8)
    keep = a < b
    return AdjointGenerator(h, basis.dim, a[keep].astype(np.int64), b[keep], s[keep])


def adjoint_rep_sum(h: PauliSum, basis: LieBasis) -> list[tuple[float, AdjointGenerator]]:
    """Linear decomposition of ``Phi^ad(h)``; identity terms are dropped."""
    return [(c, basis.adjoint(p)) for c, p in h.terms() if not p.is_identity]


def dense_generator(h: PauliSum, basis: LieBasis) -> np.ndarray:
    """Real antisymmetric ``-i Hbar`` for a Pauli sum, as a dense matrix."""
    k = np.zeros((basis.dim, basis.dim))
    for c, gen in adjoint_rep_sum(h, basis):
        k[gen.alpha, gen.beta] -= 2.0 * c * gen.sign
        k[gen.beta, gen.alpha] += 2.0 * c * gen.sign
    return k


# ---------------------------------------------------------------------------
# closures


def lie_closure_pauli(generators: Sequence[PauliString], cap: int = DEFAULT_CLOSURE_CAP) -> LieBasis:
    """Breadth-first Lie closure of Pauli generators (insertion ordered)."""
    if not generators:
        raise ValueError("need at least one generator")
    n = generators[0].n
    elements: list[PauliString] = []
    seen: set[PauliString] = set()

    def add(p: PauliString):
        if p not in seen:
            if len(elements) >= cap:
                raise ResourceLimitError(f"closure exceeds cap of {cap} elements")
            seen.add(p)
            elements.append(p)

    for g in generators:
        if g.n != n:
            raise ValueError("generators must share the qubit count")
        add(g)
    i = 0
    while i < len(elements):
        a = elements[i]
        for j in range(i):
            c = commutator(elements[j], a)
            if c is not None:
                add(c[1])
        i += 1
    return LieBasis(elements)


def _sum_commutator(a: PauliSum, b: PauliSum) -> PauliSum:
    """Hermitian ``[A, B] / 2i`` of two Pauli sums."""
    out = PauliSum(a.n)
    for ca, pa in a.terms():
        for cb, pb in b.terms():
            c = commutator(pa, pb)
            if c is not None:
                out.add_term(ca * cb * c[0], c[1])
    return out


def _dot(a: PauliSum, b: PauliSum) -> float:
    if len(a) > len(b):
        a, b = b, a
    return sum(c * b.coefficient(p) for c, p in a.terms())


def lie_closure_span(
    generators: Sequence[PauliSum], cap: int = DEFAULT_CLOSURE_CAP, tol: float = SPAN_TOLERANCE
) -> list[PauliSum]:
    """Orthonormal basis (in Pauli-coefficient space) of the Lie closure."""
    if not generators:
        raise ValueError("need at least one generator")
    basis: list[PauliSum] = []

    def add(v: PauliSum):
        for _ in range(2):  # two Gram-Schmidt passes for stability
            for q in basis:
                d = _dot(q, v)
                if d != 0.0:
                    v = v - q * d
        norm = v.norm()
        if norm <= tol:
            return
        if len(basis) >= cap:
            raise ResourceLimitError(f"closure exceeds cap of {cap} elements")
        v = v * (1.0 / norm)
        # drop roundoff-level coefficients so supports stay exact
        basis.append(PauliSum(v.n, [(c, p) for c, p in v.terms() if abs(c) > tol * 1e-3]))

    for g in generators:
        add(g)
    i = 0
    while i < len(basis):
        for j in range(i):
            add(_sum_commutator(basis[j], basis[i]))
        i += 1
    return basis


# ---------------------------------------------------------------------------
# predefined algebras


def _pair(n: int, a: str, i: int, b: str, j: int) -> PauliString:
    """``A_i Z_{i+1} ... Z_{j-1} B_j`` for ``i < j`` (1-indexed)."""
    ops = {q: "Z" for q in range(i + 1, j)}
    ops[i], ops[j] = a, b
    return PauliString.from_ops(n, ops)


def g0_generators(n: int) -> list[PauliString]:
    """Nearest-neighbour XX, YY, XY, YX and single-site Z generators."""
    gens = [_pair(n, a, j, b, j + 1) for j in range(1, n) for a, b in ("XX", "YY", "XY", "YX")]
    gens += [PauliString.single(n, "Z", j) for j in range(1, n + 1)]
    return gens


def g0_basis(n: int) -> LieBasis:
    """Free-fermion algebra basis of dimension ``n(2n-1)``.

    Order: ``Z_1..Z_n`` followed, for each ``i < j`` in lexicographic order, by
    the Z-string-dressed ``XX, YY, XY, YX`` pairs.
    """
    if n < 2:
        raise ValueError("g0 needs at least two qubits")
    elems = [PauliString.single(n, "Z", j) for j in range(1, n + 1)]
    for i in range(1, n):
        for j in range(i + 1, n + 1):
            elems += [_pair(n, a, i, b, j) for a, b in ("XX", "YY", "XY", "YX")]
    return LieBasis(elems)


def xy_generators(n: int) -> list[PauliString]:
    return [_pair(n, a, j, a, j + 1) for j in range(1, n) for a in "XY"]


def chain_sum(n: int, a: str, b: str | None = None, coef: float = 1.0) -> PauliSum:
    """``coef * sum_j A_j B_{j+1}`` (or ``coef * sum_j A_j`` when ``b`` is None)."""
    if b is None:
        return PauliSum(n, [(coef, PauliString.single(n, a, j)) for j in range(1, n + 1)])
    return PauliSum(n, [(coef, PauliString.from_ops(n, {j: a, j + 1: b})) for j in range(1, n)])


def tfim_generators(n: int) -> list[PauliSum]:
    return [chain_sum(n, "X", "X"), chain_sum(n, "Z")]


def qaoa_path_generators(n: int) -> list[PauliSum]:
    return [chain_sum(n, "Z", "Z"), chain_sum(n, "X")]


def majorana_basis(n: int) -> LieBasis:
    """Jordan-Wigner Majorana strings ``Z..Z X_j`` and ``Z..Z Y_j``.

    Their span is invariant under conjugation by the free-fermion group, so it
    carries the ``2n``-dimensional vector representation.
    """
    elems = []
    for j in range(1, n + 1):
        zs = {q: "Z" for q in range(1, j)}
        elems.append(PauliString.from_ops(n, {**zs, j: "X"}))
        elems.append(PauliString.from_ops(n, {**zs, j: "Y"}))
    return LieBasis(elems)
