"""Pauli strings in symplectic (X-mask, Z-mask) form.

Qubit ``j`` (1-indexed in text) lives on bit ``j - 1`` of both masks.  The
single-qubit operator on a site is ``i**(x*z) X**x Z**z``, so ``Y = iXZ`` and
every phase in this package is derived from that one convention.

Masks are plain Python integers, which keeps strings hashable, immutable and
valid for any qubit count.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

_PHASES = (1, 1j, -1, -1j)
_SPARSE_TOKEN = re.compile(r"^([IXYZ])(\d+)$")


class PauliSizeError(ValueError):
    """Raised when two strings on different qubit counts are combined."""


@dataclass(frozen=True, order=True, slots=True)
class PauliString:
    n: int
    x_mask: int = 0
    z_mask: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("qubit count must be non-negative")
        limit = 1 << self.n
        if not (0 <= self.x_mask < limit and 0 <= self.z_mask < limit):
            raise ValueError(f"mask does not fit in {self.n} qubits")

    # -- construction -----------------------------------------------------
    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0)

    @classmethod
    def from_label(cls, label: str, n: int | None = None) -> "PauliString":
        """Parse ``"XIZY"`` (dense) or ``"X1 Z3 Y4"`` (sparse, 1-indexed).

        Dense labels fix ``n`` themselves; sparse labels need ``n``.  The
        empty string and ``"I"`` denote the identity when ``n`` is given.
        """
        return parse_pauli(label, n)

    @classmethod
    def single(cls, n: int, op: str, qubit: int) -> "PauliString":
        """Single-site operator ``op`` on 1-indexed ``qubit``."""
        return cls.from_ops(n, {qubit: op})

    @classmethod
    def from_ops(cls, n: int, ops: dict[int, str]) -> "PauliString":
        x = z = 0
        for q, op in ops.items():
            if not 1 <= q <= n:
                raise ValueError(f"qubit {q} out of range for n={n}")
            bit = 1 << (q - 1)
            if op in ("X", "Y"):
                x |= bit
            if op in ("Z", "Y"):
                z |= bit
            if op not in ("I", "X", "Y", "Z"):
                raise ValueError(f"unknown Pauli {op!r}")
        return cls(n, x, z)

    # -- inspection -------------------------------------------------------
    def op(self, qubit: int) -> str:
        bit = 1 << (qubit - 1)
        return "IXZY"[bool(self.x_mask & bit) + 2 * bool(self.z_mask & bit)]

    def support(self) -> list[int]:
        m = self.x_mask | self.z_mask
        return [q + 1 for q in range(self.n) if m >> q & 1]

    @property
    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    def label(self) -> str:
        return "".join(self.op(q) for q in range(1, self.n + 1))

    def sparse_label(self) -> str:
        parts = [f"{self.op(q)}{q}" for q in self.support()]
        return " ".join(parts) if parts else "I"

    def __str__(self) -> str:
        return self.label()

    def __repr__(self) -> str:
        return f"PauliString({self.sparse_label()!r}, n={self.n})"


@dataclass(frozen=True)
class PhasedPauli:
    """``phase * string`` with ``phase`` one of 1, -1, 1j, -1j."""

    string: PauliString
    phase: complex


def _check(p: PauliString, q: PauliString):
    if p.n != q.n:
        raise PauliSizeError(f"qubit counts differ: {p.n} vs {q.n}")


def phase_exponent(px: int, pz: int, qx: int, qz: int) -> int:
    """Power ``k`` of ``i`` in ``P Q = i**k R`` for symplectic masks."""
    rx, rz = px ^ qx, pz ^ qz
    k = (px & pz).bit_count() + (qx & qz).bit_count() + 2 * (pz & qx).bit_count()
    return (k - (rx & rz).bit_count()) % 4


def multiply(p: PauliString, q: PauliString) -> PhasedPauli:
    _check(p, q)
    k = phase_exponent(p.x_mask, p.z_mask, q.x_mask, q.z_mask)
    r = PauliString(p.n, p.x_mask ^ q.x_mask, p.z_mask ^ q.z_mask)
    return PhasedPauli(r, _PHASES[k])


def symplectic_product(p: PauliString, q: PauliString) -> int:
    return ((p.x_mask & q.z_mask).bit_count() + (p.z_mask & q.x_mask).bit_count()) & 1


def commutes(p: PauliString, q: PauliString) -> bool:
    _check(p, q)
    return symplectic_product(p, q) == 0


def commutator(p: PauliString, q: PauliString) -> tuple[int, PauliString] | None:
    """Return ``(sign, R)`` with ``[P, Q] = 2i * sign * R``, or ``None``.

    For anticommuting strings ``PQ = phi R`` with ``phi = +-i``, hence
    ``[P, Q] = 2 PQ`` and ``sign = phi / i``.
    """
    _check(p, q)
    if symplectic_product(p, q) == 0:
        return None
    k = phase_exponent(p.x_mask, p.z_mask, q.x_mask, q.z_mask)
    r = PauliString(p.n, p.x_mask ^ q.x_mask, p.z_mask ^ q.z_mask)
    return (1 if k == 1 else -1), r


def weight(p: PauliString) -> int:
    return (p.x_mask | p.z_mask).bit_count()


def parse_pauli(label: str, n: int | None = None) -> PauliString:
    text = label.strip()
    tokens = text.split()
    sparse = len(tokens) > 1 or (len(tokens) == 1 and _SPARSE_TOKEN.match(tokens[0]))
    if sparse:
        if n is None:
            raise ValueError(f"sparse label {label!r} needs an explicit qubit count")
        ops: dict[int, str] = {}
        for tok in tokens:
            m = _SPARSE_TOKEN.match(tok)
            if not m:
                raise ValueError(f"bad sparse Pauli token {tok!r}")
            q = int(m.group(2))
            if q in ops:
                raise ValueError(f"qubit {q} repeated in {label!r}")
            ops[q] = m.group(1)
        return PauliString.from_ops(n, ops)
    if text in ("", "I") and n is not None and n != len(text):
        return PauliString.identity(n)
    if any(c not in "IXYZ" for c in text):
        raise ValueError(f"bad Pauli label {label!r}")
    if n is not None and n != len(text):
        raise PauliSizeError(f"label {label!r} has {len(text)} sites, expected {n}")
    return PauliString.from_ops(len(text), {q + 1: c for q, c in enumerate(text)})


def pauli_matrix(p: PauliString):
    """Dense ``2**n x 2**n`` matrix; basis index bit ``j-1`` is qubit ``j``."""
    import numpy as np

    d = 1 << p.n
    idx = np.arange(d, dtype=np.int64)
    cols = idx ^ p.x_mask
    # (P psi)[k] = i^{|x&z|} (-1)^{|(k^x)&z|} psi[k^x]; row k, column k^x.
    signs = 1 - 2 * (np.bitwise_count(cols & p.z_mask).astype(np.int64) & 1)
    m = np.zeros((d, d), dtype=complex)
    m[idx, cols] = signs * (1j ** ((p.x_mask & p.z_mask).bit_count() % 4))
    return m


class PauliSum:
    """Finite real combination ``sum_P c_P P`` of Pauli strings (a Hermitian operator)."""

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms=None):
        self.n = n
        self._terms: dict[PauliString, float] = {}
        for coef, p in terms or ():
            self.add_term(coef, p)

    @classmethod
    def from_terms(cls, n: int, terms) -> "PauliSum":
        """Build from ``[(coef, PauliString | label), ...]``."""
        return cls(n, [(c, parse_pauli(p, n) if isinstance(p, str) else p) for c, p in terms])

    @classmethod
    def single(cls, p: PauliString, coef: float = 1.0) -> "PauliSum":
        return cls(p.n, [(coef, p)])

    def add_term(self, coef: float, p: PauliString):
        if p.n != self.n:
            raise PauliSizeError(f"term on {p.n} qubits added to sum on {self.n}")
        c = self._terms.get(p, 0.0) + float(coef)
        if c == 0.0:
            self._terms.pop(p, None)
        else:
            self._terms[p] = c

    def terms(self) -> list[tuple[float, PauliString]]:
        return [(c, p) for p, c in self._terms.items()]

    def coefficient(self, p: PauliString) -> float:
        return self._terms.get(p, 0.0)

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self.terms())

    def __add__(self, other: "PauliSum") -> "PauliSum":
        out = PauliSum(self.n, self.terms())
        for c, p in other.terms():
            out.add_term(c, p)
        return out

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + other * -1.0

    def __mul__(self, scalar: float) -> "PauliSum":
        return PauliSum(self.n, [(c * scalar, p) for c, p in self.terms()])

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, PauliSum) and self.n == other.n and self._terms == other._terms

    def norm(self) -> float:
        """Normalized Hilbert-Schmidt norm ``sqrt(Tr[H^2] / 2**n) = sqrt(sum c^2)``."""
        return sum(c * c for c in self._terms.values()) ** 0.5

    def without_identity(self) -> tuple["PauliSum", float]:
        ident = PauliString.identity(self.n)
        rest = PauliSum(self.n, [(c, p) for c, p in self.terms() if p != ident])
        return rest, self._terms.get(ident, 0.0)

    def to_matrix(self):
        import numpy as np

        d = 1 << self.n
        m = np.zeros((d, d), dtype=complex)
        for c, p in self.terms():
            m += c * pauli_matrix(p)
        return m

    def __repr__(self):
        body = " + ".join(f"{c:g}*{p.sparse_label()}" for c, p in self.terms()) or "0"
        return f"PauliSum({body}, n={self.n})"
