"""Circuits and their evolution in the adjoint picture.

A gate ``exp(-i theta G)`` with ``G = sum_k c_k P_k`` (commuting Pauli terms)
acts on an expectation vector as a product of Givens rotations, one per
coupling of each term.  Pauli noise channels act diagonally.  Circuits are
compiled once per basis into flat arrays (a "program") that the numba kernels
below walk through.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numba
import numpy as np
from scipy import sparse

from .lie import LieBasis, dense_generator
from .pauli import PauliString, PauliSum, commutes, parse_pauli

SCHEMA = "gsim-circuit/1"
PROB_TOL = 1e-12


class NoiseNotSupportedError(ValueError):
    """Operation needs a unitary-only circuit."""


# ---------------------------------------------------------------------------
# circuit description


def as_pauli_sum(gen, n: int) -> PauliSum:
    if isinstance(gen, PauliSum):
        return gen
    if isinstance(gen, PauliString):
        return PauliSum.single(gen)
    if isinstance(gen, str):
        return PauliSum.single(parse_pauli(gen, n))
    return PauliSum.from_terms(n, gen)


@dataclass
class Gate:
    """``exp(-i theta G)``; ``theta`` is ``params[param]`` or the fixed ``angle``."""

    generator: PauliSum
    param: int | None = None
    angle: float = 0.0

    def __post_init__(self):
        terms = [p for _, p in self.generator.terms()]
        for i, p in enumerate(terms):
            for q in terms[i + 1 :]:
                if not commutes(p, q):
                    raise ValueError(
                        f"gate terms {p.sparse_label()} and {q.sparse_label()} do not commute"
                    )

    def theta(self, params) -> float:
        return float(params[self.param]) if self.param is not None else self.angle


@dataclass
class NoiseChannel:
    """``rho -> sum_k p_k V_k rho V_k`` with Pauli ``V_k`` (identity listed explicitly)."""

    terms: list[tuple[float, PauliString]]

    def __post_init__(self):
        probs = np.array([p for p, _ in self.terms], dtype=float)
        if np.any(probs < 0):
            raise ValueError("noise probabilities must be non-negative")
        if abs(probs.sum() - 1.0) > PROB_TOL:
            raise ValueError(f"noise probabilities sum to {probs.sum()!r}, not 1")
        ns = {v.n for _, v in self.terms}
        if len(ns) != 1:
            raise ValueError("noise terms must share the qubit count")

    @property
    def n(self) -> int:
        return self.terms[0][1].n

    def support(self) -> tuple[int, ...]:
        qs: set[int] = set()
        for _, v in self.terms:
            qs.update(v.support())
        return tuple(sorted(qs))

    @classmethod
    def depolarizing(cls, n: int, qubit: int, p: float) -> "NoiseChannel":
        terms = [(1.0 - p, PauliString.identity(n))]
        terms += [(p / 3, PauliString.single(n, op, qubit)) for op in "XYZ"]
        return cls(terms)

    @classmethod
    def random_two_qubit(cls, n: int, q1: int, q2: int, p: float, rng) -> "NoiseChannel":
        """Identity with weight ``1 - p`` plus the 15 other two-site Paulis, weights U(0,1) rescaled to ``p``."""
        w = rng.uniform(0.0, 1.0, size=15)
        w *= p / w.sum()
        terms = [(1.0 - p, PauliString.identity(n))]
        k = 0
        for a in "IXYZ":
            for b in "IXYZ":
                if a == b == "I":
                    continue
                terms.append((float(w[k]), PauliString.from_ops(n, {q1: a, q2: b})))
                k += 1
        return cls(terms)


Element = Union[Gate, NoiseChannel]


class Circuit:
    def __init__(self, n: int, elements: Sequence[Element] = (), n_params: int = 0):
        self.n = n
        self.elements: list[Element] = []
        self.n_params = n_params
        for el in elements:
            self._append(el)
        self._programs: dict[int, tuple[LieBasis, "Program"]] = {}

    def _append(self, el: Element):
        n_el = el.n if isinstance(el, NoiseChannel) else el.generator.n
        if n_el != self.n:
            raise ValueError(f"element on {n_el} qubits added to circuit on {self.n}")
        if isinstance(el, Gate) and el.param is not None:
            if el.param < 0:
                raise ValueError("parameter index must be non-negative")
            self.n_params = max(self.n_params, el.param + 1)
        self.elements.append(el)
        self._programs = {}

    def new_param(self) -> int:
        self.n_params += 1
        return self.n_params - 1

    def gate(self, generator, param: int | None = None, angle: float | None = None) -> int | None:
        """Append a gate.  With neither ``param`` nor ``angle`` a fresh parameter is allocated."""
        if param is None and angle is None:
            param = self.new_param()
        self._append(Gate(as_pauli_sum(generator, self.n), param, 0.0 if angle is None else float(angle)))
        return param

    def noise(self, channel: NoiseChannel):
        self._append(channel)

    def extend(self, other: "Circuit", param_offset: int = 0):
        for el in other.elements:
            if isinstance(el, Gate) and el.param is not None:
                el = Gate(el.generator, el.param + param_offset, el.angle)
            self._append(el)

    @property
    def has_noise(self) -> bool:
        return any(isinstance(el, NoiseChannel) for el in self.elements)

    @property
    def gates(self) -> list[Gate]:
        return [el for el in self.elements if isinstance(el, Gate)]

    def __len__(self):
        return len(self.elements)

    def reversed(self) -> "Circuit":
        """Elements in reverse order, parameter ``k`` renamed ``n_params - 1 - k``, fixed angles negated.

        Evaluated at ``-params[::-1]`` this is the inverse circuit.
        """
        out = Circuit(self.n, n_params=self.n_params)
        for el in reversed(self.elements):
            if isinstance(el, Gate):
                p = None if el.param is None else self.n_params - 1 - el.param
                el = Gate(el.generator, p, -el.angle)
            out._append(el)
        return out

    def program(self, basis: LieBasis) -> "Program":
        hit = self._programs.get(id(basis))
        if hit is None or hit[0] is not basis:
            hit = (basis, compile_program(self, basis))
            self._programs[id(basis)] = hit
        return hit[1]

    def check_params(self, params) -> np.ndarray:
        params = np.asarray(params, dtype=float).ravel()
        if len(params) != self.n_params:
            raise ValueError(f"expected {self.n_params} parameters, got {len(params)}")
        return params

    # -- serialization ------------------------------------------------------
    def to_json(self) -> str:
        out = []
        for el in self.elements:
            if isinstance(el, Gate):
                terms = el.generator.terms()
                if len(terms) == 1 and terms[0][0] == 1.0:
                    gen = terms[0][1].sparse_label()
                else:
                    gen = [[repr(c), p.sparse_label()] for c, p in terms]
                d = {"type": "gate", "generator": gen}
                if el.param is None:
                    d["angle"] = el.angle
                else:
                    d["param"] = el.param
                out.append(d)
            else:
                out.append({"type": "noise", "terms": [[p, v.sparse_label()] for p, v in el.terms]})
        return json.dumps({"schema": SCHEMA, "n": self.n, "n_params": self.n_params, "elements": out})

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        doc = json.loads(text)
        if doc.get("schema") != SCHEMA:
            raise ValueError(f"unsupported circuit schema {doc.get('schema')!r}")
        n = int(doc["n"])
        c = cls(n, n_params=int(doc.get("n_params", 0)))
        for el in doc["elements"]:
            if el["type"] == "gate":
                gen = el["generator"]
                if isinstance(gen, list):
                    gen = PauliSum.from_terms(n, [(float(cf), lab) for cf, lab in gen])
                c._append(Gate(as_pauli_sum(gen, n), el.get("param"), float(el.get("angle", 0.0))))
            elif el["type"] == "noise":
                c._append(NoiseChannel([(float(p), parse_pauli(v, n)) for p, v in el["terms"]]))
            else:
                raise ValueError(f"unknown element type {el['type']!r}")
        return c


# ---------------------------------------------------------------------------
# compiled programs

OP_ROT, OP_NOISE = 0, 1


def _local_code(v: PauliString, qubits: tuple[int, ...]) -> int:
    code = 0
    for k, q in enumerate(qubits):
        b = 1 << (q - 1)
        code |= (2 * bool(v.x_mask & b) + bool(v.z_mask & b)) << (2 * k)
    return code


_PARITY_CACHE: dict[int, np.ndarray] = {}


def _sign_table(n_sites: int) -> np.ndarray:
    """``chi[v, c] = +-1``: whether local codes ``v`` and ``c`` commute."""
    t = _PARITY_CACHE.get(n_sites)
    if t is None:
        codes = np.arange(4**n_sites)
        x = np.zeros_like(codes)
        z = np.zeros_like(codes)
        for k in range(n_sites):
            x |= ((codes >> (2 * k + 1)) & 1) << k
            z |= ((codes >> (2 * k)) & 1) << k
        par = np.bitwise_count((x[:, None] & z[None, :]) ^ (z[:, None] & x[None, :])).astype(np.int64) & 1
        t = (1 - 2 * par).astype(float)
        _PARITY_CACHE[n_sites] = t
    return t


@dataclass
class Program:
    """Flat, kernel-ready form of a circuit on a basis."""

    dim: int
    op_kind: np.ndarray
    op_ref: np.ndarray
    op_param: np.ndarray
    op_coef: np.ndarray
    op_angle: np.ndarray
    element_end: np.ndarray  # op index after each circuit element
    g_ptr: np.ndarray
    g_a: np.ndarray
    g_b: np.ndarray
    g_s: np.ndarray
    ch_sup: np.ndarray
    ch_off: np.ndarray  # offset of each channel's exact diagonal table
    ch_tab: np.ndarray
    ch_term_ptr: np.ndarray  # per channel range into the term arrays below
    term_prob: np.ndarray
    term_off: np.ndarray  # offset of each term's sign table in ``term_tab``
    term_tab: np.ndarray
    sup_ptr: np.ndarray
    sup_idx: np.ndarray
    sup_code: np.ndarray

    @property
    def n_ops(self) -> int:
        return len(self.op_kind)

    @property
    def n_channels(self) -> int:
        return len(self.ch_sup)

    def kernel_args(self, ch_off=None):
        return (
            self.op_kind, self.op_ref, self.op_param, self.op_coef, self.op_angle,
            self.g_ptr, self.g_a, self.g_b, self.g_s,
            self.ch_sup, self.ch_off if ch_off is None else ch_off,
            self.ch_tab if ch_off is None else self.term_tab,
            self.sup_ptr, self.sup_idx, self.sup_code,
        )  # fmt: skip

    def run(self, a: np.ndarray, params, start: int = 0, stop: int | None = None, inverse: bool = False):
        """Apply ops ``[start, stop)`` to the rows of ``a`` (1D or 2D, modified in place)."""
        stop = self.n_ops if stop is None else stop
        a2 = a.reshape(len(a), -1)
        _run_rows(a2, np.asarray(params, dtype=float), start, stop, inverse, *self.kernel_args())
        return a


def compile_program(circuit: Circuit, basis: LieBasis) -> Program:
    if circuit.n != basis.n:
        raise ValueError(f"circuit on {circuit.n} qubits, basis on {basis.n}")
    gen_ids: dict[PauliString, int] = {}
    gens = []
    sup_ids: dict[tuple[int, ...], int] = {}
    sups = []
    kind, ref, param, coef, angle, ends = [], [], [], [], [], []
    channels: list[tuple[int, NoiseChannel]] = []
    for el in circuit.elements:
        if isinstance(el, Gate):
            for c, p in el.generator.terms():
                if p.is_identity:
                    continue  # global phase
                g = gen_ids.get(p)
                if g is None:
                    g = gen_ids[p] = len(gens)
                    gens.append(basis.adjoint(p))
                kind.append(OP_ROT)
                ref.append(g)
                param.append(-1 if el.param is None else el.param)
                coef.append(c)
                angle.append(el.angle)
        else:
            qs = el.support()
            s = sup_ids.get(qs)
            if s is None:
                s = sup_ids[qs] = len(sups)
                sups.append(qs)
            kind.append(OP_NOISE)
            ref.append(len(channels))
            param.append(-1)
            coef.append(0.0)
            angle.append(0.0)
            channels.append((s, el))
        ends.append(len(kind))

    g_ptr = np.zeros(len(gens) + 1, dtype=np.int64)
    for i, g in enumerate(gens):
        g_ptr[i + 1] = g_ptr[i] + len(g)
    cat = lambda xs, dt: np.concatenate(xs).astype(dt) if xs else np.zeros(0, dt)  # noqa: E731
    g_a = cat([g.alpha for g in gens], np.int32)
    g_b = cat([g.beta for g in gens], np.int32)
    g_s = cat([g.sign for g in gens], np.float64)

    sup_ptr = np.zeros(len(sups) + 1, dtype=np.int64)
    sidx, scode = [], []
    for i, qs in enumerate(sups):
        idx, code = basis.support_classes(qs)
        sidx.append(idx)
        scode.append(code)
        sup_ptr[i + 1] = sup_ptr[i] + len(idx)

    ch_sup = np.array([s for s, _ in channels], dtype=np.int32)
    ch_off = np.zeros(len(channels), dtype=np.int64)
    ch_term_ptr = np.zeros(len(channels) + 1, dtype=np.int64)
    tabs, term_prob, term_off, term_tabs = [], [], [], []
    off = toff = 0
    for i, (s, ch) in enumerate(channels):
        qs = sups[s]
        chi = _sign_table(len(qs))
        vcodes = np.array([_local_code(v, qs) for _, v in ch.terms])
        probs = np.array([p for p, _ in ch.terms])
        tabs.append(probs @ chi[vcodes])
        ch_off[i] = off
        off += len(chi)
        for p, vc in zip(probs, vcodes):
            term_prob.append(p)
            term_off.append(toff)
            term_tabs.append(chi[vc])
            toff += len(chi)
        ch_term_ptr[i + 1] = ch_term_ptr[i] + len(probs)

    return Program(
        dim=basis.dim,
        op_kind=np.array(kind, dtype=np.int8),
        op_ref=np.array(ref, dtype=np.int32),
        op_param=np.array(param, dtype=np.int32),
        op_coef=np.array(coef, dtype=np.float64),
        op_angle=np.array(angle, dtype=np.float64),
        element_end=np.array(ends, dtype=np.int64),
        g_ptr=g_ptr, g_a=g_a, g_b=g_b, g_s=g_s,
        ch_sup=ch_sup, ch_off=ch_off, ch_tab=cat(tabs, np.float64),
        ch_term_ptr=ch_term_ptr,
        term_prob=np.array(term_prob, dtype=np.float64),
        term_off=np.array(term_off, dtype=np.int64),
        term_tab=cat(term_tabs, np.float64),
        sup_ptr=sup_ptr, sup_idx=cat(sidx, np.int32), sup_code=cat(scode, np.int32),
    )  # fmt: skip


# ---------------------------------------------------------------------------
# kernels


@numba.njit(cache=True)
def _rotate_rows(a, c, sn, lo, hi, g_a, g_b, g_s):
    m = a.shape[1]
    for k in range(lo, hi):
        i = g_a[k]
        j = g_b[k]
        ss = g_s[k] * sn
        for col in range(m):
            x = a[i, col]
            y = a[j, col]
            a[i, col] = c * x - ss * y
            a[j, col] = ss * x + c * y


@numba.njit(cache=True)
def _scale_rows(a, lo, hi, sup_idx, sup_code, tab, off):
    m = a.shape[1]
    for k in range(lo, hi):
        f = tab[off + sup_code[k]]
        i = sup_idx[k]
        for col in range(m):
            a[i, col] *= f


@numba.njit(cache=True)
def _op_angle(t, params, op_param, op_coef, op_angle):
    p = op_param[t]
    th = params[p] if p >= 0 else op_angle[t]
    return op_coef[t] * th


@numba.njit(cache=True)
def _run_rows(
    a, params, start, stop, inverse,
    op_kind, op_ref, op_param, op_coef, op_angle,
    g_ptr, g_a, g_b, g_s,
    ch_sup, ch_off, ch_tab, sup_ptr, sup_idx, sup_code,
):  # fmt: skip
    n = stop - start
    for step in range(n):
        t = stop - 1 - step if inverse else start + step
        if op_kind[t] == 0:
            phi = _op_angle(t, params, op_param, op_coef, op_angle)
            if inverse:
                phi = -phi
            g = op_ref[t]
            _rotate_rows(a, math.cos(2.0 * phi), math.sin(2.0 * phi), g_ptr[g], g_ptr[g + 1], g_a, g_b, g_s)
        else:
            ch = op_ref[t]
            s = ch_sup[ch]
            _scale_rows(a, sup_ptr[s], sup_ptr[s + 1], sup_idx, sup_code, ch_tab, ch_off[ch])


@numba.njit(cache=True)
def _trajectories(
    e_in, w1, w2, params, choices, term_off_sel,
    op_kind, op_ref, op_param, op_coef, op_angle,
    g_ptr, g_a, g_b, g_s,
    ch_sup, ch_off_unused, term_tab, sup_ptr, sup_idx, sup_code,
):  # fmt: skip
    """Per trajectory: rows then columns through the sampled circuit, then ``w1 E w2``."""
    n_traj = choices.shape[0]
    n_ch = choices.shape[1]
    out = np.empty(n_traj)
    n_ops = len(op_kind)
    for r in range(n_traj):
        offs = np.empty(n_ch, dtype=np.int64)
        for ch in range(n_ch):
            offs[ch] = term_off_sel[ch, choices[r, ch]]
        e = e_in.copy()
        for side in range(2):
            _run_rows(
                e, params, 0, n_ops, False,
                op_kind, op_ref, op_param, op_coef, op_angle,
                g_ptr, g_a, g_b, g_s,
                ch_sup, offs, term_tab, sup_ptr, sup_idx, sup_code,
            )  # fmt: skip
            e = np.ascontiguousarray(e.T)
        acc = 0.0
        d = e.shape[0]
        for i in range(d):
            wi = w1[i]
            if wi != 0.0:
                for j in range(e.shape[1]):
                    acc += wi * e[i, j] * w2[j]
        out[r] = acc
    return out


# ---------------------------------------------------------------------------
# public operations


def apply_gate(e: np.ndarray, gate: Gate, theta: float, basis: LieBasis) -> np.ndarray:
    """Rotate ``e`` (in place) by the adjoint action of ``gate`` at angle ``theta``."""
    for coef, p in gate.generator.terms():
        if p.is_identity:
            continue
        g = basis.adjoint(p)
        phi = coef * theta
        c, sn = math.cos(2 * phi), math.sin(2 * phi)
        ea, eb = e[g.alpha].copy(), e[g.beta].copy()
        e[g.alpha] = c * ea - g.sign * sn * eb
        e[g.beta] = g.sign * sn * ea + c * eb
    return e


def noise_diagonal(channel: NoiseChannel, basis: LieBasis) -> np.ndarray:
    """``d[a] = sum_k p_k chi(V_k, B_a)`` with ``chi = +1`` (commute) or ``-1``."""
    qs = channel.support()
    d = np.ones(basis.dim)
    if not qs:
        return d
    idx, code = basis.support_classes(qs)
    chi = _sign_table(len(qs))
    table = np.array([p for p, _ in channel.terms]) @ chi[[_local_code(v, qs) for _, v in channel.terms]]
    d[idx] = table[code]
    return d


def apply_noise_channel(e: np.ndarray, channel: NoiseChannel, basis: LieBasis) -> np.ndarray:
    e *= noise_diagonal(channel, basis).reshape((-1,) + (1,) * (e.ndim - 1))
    return e


def evolve(e_in: np.ndarray, circuit: Circuit, params, basis: LieBasis) -> np.ndarray:
    """Expectation vector after the circuit (noise channels applied exactly)."""
    params = circuit.check_params(params)
    e = np.array(e_in, dtype=float, copy=True)
    if e.shape[0] != basis.dim:
        raise ValueError(f"vector of length {e.shape[0]} for basis of dimension {basis.dim}")
    return circuit.program(basis).run(e, params)


def expectation(w: np.ndarray, e: np.ndarray) -> float:
    w, e = np.asarray(w), np.asarray(e)
    if w.shape != e.shape:
        raise ValueError(f"weight shape {w.shape} does not match {e.shape}")
    return float(w @ e)


def evolve_correlation(E_in: np.ndarray, circuit: Circuit, params, basis: LieBasis) -> np.ndarray:
    """``U E U^T`` for the circuit's adjoint matrix ``U`` (rows, then columns)."""
    if circuit.has_noise:
        raise NoiseNotSupportedError("noisy correlators need sample_noisy_correlator")
    params = circuit.check_params(params)
    prog = circuit.program(basis)
    E = np.array(E_in, dtype=float, copy=True)
    prog.run(E, params)
    Et = np.ascontiguousarray(E.T)
    prog.run(Et, params)
    return np.ascontiguousarray(Et.T)


def sample_noisy_correlator(
    E_in: np.ndarray, circuit: Circuit, params, basis: LieBasis, w1, w2, shots: int, seed=None
) -> tuple[float, float]:
    """Monte Carlo over noise trajectories of ``w1^T E_out w2``; returns (mean, standard error)."""
    if shots < 1:
        raise ValueError("need at least one trajectory")
    params = circuit.check_params(params)
    prog = circuit.program(basis)
    rng = np.random.default_rng(seed)
    n_ch = prog.n_channels
    max_terms = int(np.max(np.diff(prog.ch_term_ptr))) if n_ch else 1
    choices = np.zeros((shots, n_ch), dtype=np.int64)
    sel = np.zeros((n_ch, max_terms), dtype=np.int64)
    for ch in range(n_ch):
        lo, hi = prog.ch_term_ptr[ch], prog.ch_term_ptr[ch + 1]
        probs = prog.term_prob[lo:hi]
        choices[:, ch] = rng.choice(hi - lo, size=shots, p=probs / probs.sum())
        sel[ch, : hi - lo] = prog.term_off[lo:hi]
    args = prog.kernel_args(ch_off=np.zeros(n_ch, dtype=np.int64))
    vals = _trajectories(
        np.ascontiguousarray(E_in, dtype=float), np.asarray(w1, float), np.asarray(w2, float),
        params, choices, sel, *args,
    )  # fmt: skip
    mean = float(vals.mean())
    err = float(vals.std(ddof=1) / math.sqrt(shots)) if shots > 1 else 0.0
    return mean, err


def adjoint_matrix(circuit: Circuit, params, basis: LieBasis) -> np.ndarray:
    """Dense orthogonal ``U`` with ``e_out = U e_in``."""
    if circuit.has_noise:
        raise NoiseNotSupportedError("adjoint matrices are built for unitary circuits only")
    params = circuit.check_params(params)
    return circuit.program(basis).run(np.eye(basis.dim), params)


# ---------------------------------------------------------------------------
# matrix exponential

_PADE13 = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0, 10559470521600.0, 670442572800.0, 33522128640.0,
    1323241920.0, 40840800.0, 960960.0, 16380.0, 182.0, 1.0,
)  # fmt: skip
_THETA13 = 5.371920351148152


def expm(a: np.ndarray) -> np.ndarray:
    """Scaling and squaring with the degree-13 Pade approximant."""
    a = np.asarray(a, dtype=float)
    norm = np.abs(a).sum(axis=0).max() if a.size else 0.0
    s = max(0, int(math.ceil(math.log2(norm / _THETA13)))) if norm > _THETA13 else 0
    a = a / 2.0**s
    b = _PADE13
    ident = np.eye(len(a))
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a2 @ a4
    u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
    v = a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident
    r = np.linalg.solve(v - u, v + u)
    for _ in range(s):
        r = r @ r
    return r


def target_adjoint(h: PauliSum, t: float, basis: LieBasis) -> np.ndarray:
    """Adjoint matrix of ``exp(-i t H)``."""
    return expm(t * dense_generator(h, basis))


def sparse_generator(h: PauliSum, basis: LieBasis) -> sparse.csr_matrix:
    """Sparse real antisymmetric generator of ``exp(-i t H)`` in the adjoint picture."""
    from .lie import adjoint_rep_sum

    rows, cols, vals = [], [], []
    for c, g in adjoint_rep_sum(h, basis):
        rows += [g.alpha, g.beta]
        cols += [g.beta, g.alpha]
        vals += [-2.0 * c * g.sign, 2.0 * c * g.sign]
    if not rows:
        return sparse.csr_matrix((basis.dim, basis.dim))
    return sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(basis.dim, basis.dim)
    )


def analog_evolve(
    e_in: np.ndarray,
    terms: Sequence[tuple[Callable[[float], float], PauliSum]],
    t_final: float,
    basis: LieBasis,
    stepsize: float | None = None,
) -> np.ndarray:
    """RK4 integration of ``de/dt = sum_h c_h(t) K_h e`` for ``H(t) = sum_h c_h(t) H_h``."""
    stepsize = t_final / 1000 if stepsize is None else stepsize
    if stepsize <= 0:
        raise ValueError("stepsize must be positive")
    mats = [(f, sparse_generator(h, basis)) for f, h in terms]
    e = np.array(e_in, dtype=float, copy=True)
    if not mats or t_final == 0:
        return e

    def rhs(t, y):
        out = np.zeros_like(y)
        for f, k in mats:
            c = f(t)
            if c != 0.0:
                out += c * (k @ y)
        return out

    steps = max(1, int(round(t_final / stepsize)))
    h = t_final / steps
    t = 0.0
    for _ in range(steps):
        k1 = rhs(t, e)
        k2 = rhs(t + h / 2, e + h / 2 * k1)
        k3 = rhs(t + h / 2, e + h / 2 * k2)
        k4 = rhs(t + h, e + h * k3)
        e = e + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return e
