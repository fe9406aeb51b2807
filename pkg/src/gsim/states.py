"""Classical descriptions of input states.

A state is described by its expectations on the basis strings (a vector) and
optionally on products of two basis strings (a matrix).  Every supported
state is a tensor product of small blocks, so a Pauli expectation factorizes
into per-block expectations that are evaluated densely on at most ``2**12``
amplitudes.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .lie import LieBasis, ResourceLimitError, _popcount_rows as pop
from .pauli import PauliSizeError

MAX_BLOCK = 12
_NORM_TOL = 1e-12


def ket_index(bits: str) -> int:
    """Statevector index of a ket label read as qubit 1, 2, ... left to right."""
    return sum(int(c) << k for k, c in enumerate(bits))


@dataclass(frozen=True)
class Block:
    first: int  # 0-based first qubit
    size: int
    amplitudes: np.ndarray = field(repr=False, compare=False)
    key: bytes = field(repr=False)


def _make_block(first: int, amps) -> Block:
    amps = np.asarray(amps, dtype=complex).ravel()
    size = int(round(np.log2(len(amps))))
    if 1 << size != len(amps):
        raise ValueError("block amplitude vector length must be a power of two")
    if size > MAX_BLOCK:
        raise ResourceLimitError(f"block size {size} exceeds {MAX_BLOCK}")
    if abs(np.vdot(amps, amps).real - 1.0) > _NORM_TOL:
        raise ValueError("block amplitudes must be normalized")
    amps.setflags(write=False)
    return Block(first, size, amps, amps.tobytes())


class StateSpec:
    """Product of blocks; build with the classmethods below."""

    def __init__(self, n: int, blocks: list[Block], variant: str, params: dict | None = None):
        self.n = n
        self.blocks = blocks
        self.variant = variant
        self.params = params or {}
        covered = sum(b.size for b in blocks)
        if covered != n:
            raise ValueError(f"blocks cover {covered} qubits, state has {n}")
        # block-local expectation cache: amplitude key -> {local code: value}
        self._cache: dict[bytes, dict[int, complex]] = {}

    @classmethod
    def computational(cls, bits: str) -> "StateSpec":
        if any(c not in "01" for c in bits):
            raise ValueError(f"bad bitstring {bits!r}")
        kets = [np.eye(2)[int(c)] for c in bits]
        return cls(len(bits), [_make_block(q, a) for q, a in enumerate(kets)], "computational", {"bits": bits})

    @classmethod
    def zeros(cls, n: int) -> "StateSpec":
        return cls.computational("0" * n)

    @classmethod
    def product(cls, kets) -> "StateSpec":
        """Product of single-qubit kets, each a length-2 complex vector."""
        blocks = [_make_block(q, k) for q, k in enumerate(kets)]
        return cls(len(blocks), blocks, "product")

    @classmethod
    def plus_all(cls, n: int) -> "StateSpec":
        plus = np.full(2, 2**-0.5)
        return cls(n, [_make_block(q, plus) for q in range(n)], "plus_all")

    @classmethod
    def block_product(cls, amplitudes, repetitions: int) -> "StateSpec":
        """``repetitions`` copies of one block state on consecutive qubits."""
        amps = np.asarray(amplitudes, dtype=complex)
        size = int(round(np.log2(len(amps))))
        if size > MAX_BLOCK:
            raise ResourceLimitError(f"block size {size} exceeds {MAX_BLOCK}")
        blocks = [_make_block(r * size, amps) for r in range(repetitions)]
        return cls(size * repetitions, blocks, "block_product", {"block_size": size})

    @classmethod
    def magic(cls, n: int, tau: float) -> "StateSpec":
        """``[(|0000> + |0011> + |1100> + e^{i tau}|1111>) / 2]`` on each group of four."""
        if n % 4:
            raise ValueError("magic state needs n divisible by 4")
        amps = np.zeros(16, dtype=complex)
        for bits, ph in (("0000", 1), ("0011", 1), ("1100", 1), ("1111", np.exp(1j * tau))):
            amps[ket_index(bits)] = ph / 2
        spec = cls.block_product(amps, n // 4)
        spec.variant = "magic"
        spec.params = {"tau": tau}
        return spec

    def statevector(self) -> np.ndarray:
        """Dense amplitudes (little-endian); intended for small ``n`` only."""
        if self.n > 20:
            raise ResourceLimitError("dense statevector only for n <= 20")
        psi = np.ones(1, dtype=complex)
        for b in self.blocks:
            # later qubits occupy higher bits
            psi = np.kron(b.amplitudes, psi)
        return psi

    # -- block expectations -------------------------------------------------
    def _block_values(self, block: Block, codes: np.ndarray) -> np.ndarray:
        """Expectations of block-local strings ``code = x | z << size``."""
        table = self._cache.setdefault(block.key, {})
        uniq, inv = np.unique(codes, return_inverse=True)
        vals = np.empty(len(uniq), dtype=complex)
        psi = block.amplitudes
        k = np.arange(1 << block.size, dtype=np.int64)
        mask = (1 << block.size) - 1
        for i, c in enumerate(uniq.tolist()):
            v = table.get(c)
            if v is None:
                x, z = c & mask, c >> block.size
                signs = 1 - 2 * (np.bitwise_count((k ^ x) & z).astype(np.int64) & 1)
                v = 1j ** (int(x & z).bit_count() % 4) * np.vdot(psi, signs * psi[k ^ x])
                table[c] = v
            vals[i] = v
        return vals[inv]

    def pauli_expectations(self, x_words: np.ndarray, z_words: np.ndarray) -> np.ndarray:
        """Complex ``<P>`` for strings given as (m, words) uint64 mask arrays."""
        out = np.ones(len(x_words), dtype=complex)
        for block in self.blocks:
            codes = np.zeros(len(x_words), dtype=np.int64)
            for k in range(block.size):
                q = block.first + k
                w, b = divmod(q, 64)
                xb = ((x_words[:, w] >> np.uint64(b)) & np.uint64(1)).astype(np.int64)
                zb = ((z_words[:, w] >> np.uint64(b)) & np.uint64(1)).astype(np.int64)
                codes |= (xb << k) | (zb << (block.size + k))
            nz = np.nonzero(codes)[0]
            if len(nz):
                out[nz] *= self._block_values(block, codes[nz])
        return out


def _check(spec: StateSpec, basis: LieBasis):
    if spec.n != basis.n:
        raise PauliSizeError(f"state on {spec.n} qubits, basis on {basis.n}")


def expectation_vector(spec: StateSpec, basis: LieBasis) -> np.ndarray:
    """``e[a] = <B_a>`` on the state."""
    _check(spec, basis)
    return spec.pauli_expectations(basis.x_words, basis.z_words).real.copy()


def correlation_matrix(spec: StateSpec, basis1: LieBasis, basis2: LieBasis | None = None, chunk: int = 1 << 18) -> np.ndarray:
    """``E[a, b] = Re <B_a B_b>``; only the real part is kept."""
    basis2 = basis1 if basis2 is None else basis2
    _check(spec, basis1)
    _check(spec, basis2)
    d1, d2 = basis1.dim, basis2.dim
    out = np.empty((d1, d2))
    rows = max(1, chunk // max(d2, 1))
    bx, bz = basis2.x_words[None], basis2.z_words[None]
    for r0 in range(0, d1, rows):
        ax = basis1.x_words[r0 : r0 + rows, None]
        az = basis1.z_words[r0 : r0 + rows, None]
        rx, rz = ax ^ bx, az ^ bz
        k = (pop(ax & az) + pop(bx & bz) + 2 * pop(az & bx) - pop(rx & rz)) % 4
        m = k.shape[0]
        vals = spec.pauli_expectations(rx.reshape(-1, basis1.n_words), rz.reshape(-1, basis1.n_words)).real
        vals = vals.reshape(m, d2)
        # Re(i^k <R>) with <R> real: +, 0, -, 0
        out[r0 : r0 + m] = np.where(k == 0, vals, np.where(k == 2, -vals, 0.0))
    return out


def vector_to_csv(e: np.ndarray, basis: LieBasis) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["index", "pauli_string", "value"])
    for i, (p, v) in enumerate(zip(basis.elements, e)):
        wr.writerow([i, p.label(), repr(float(v))])
    return buf.getvalue()
