"""Fast statevector engine for circuits of frame-diagonal layer gates.

The pre-training studies continue optimization outside the polynomial
algebra, on circuits whose gates are ``exp(-i theta c D)`` with ``D`` a
diagonal integer-valued operator either in the computational (Z) frame or in
the Hadamard-rotated (X) frame: sums of ``Z``, ``ZZ``, ``X`` and ``XX`` terms.
Switching frames is a Walsh-Hadamard transform, and gradients use the adjoint
method (one forward and one backward sweep).
"""

from __future__ import annotations

import math

import numba
import numpy as np

Z_FRAME, X_FRAME = 0, 1


def popcounts(n: int) -> np.ndarray:
    return np.bitwise_count(np.arange(1 << n, dtype=np.int64)).astype(np.int64)


def sum_z_levels(n: int) -> np.ndarray:
    """Eigenvalues of ``sum_j Z_j`` on computational states."""
    return n - 2 * popcounts(n)


def cut_levels(n: int, edges) -> np.ndarray:
    """Number of cut edges for every computational state (qubit ``j`` on bit ``j - 1``)."""
    k = np.arange(1 << n, dtype=np.int64)
    cut = np.zeros(1 << n, dtype=np.int64)
    for a, b in edges:
        cut += ((k >> (a - 1)) ^ (k >> (b - 1))) & 1
    return cut


def zz_levels(n: int, edges) -> np.ndarray:
    """Eigenvalues of ``sum_(a,b) Z_a Z_b``."""
    return len(edges) - 2 * cut_levels(n, edges)


@numba.njit(cache=True)
def fwht(psi):
    """Normalized Walsh-Hadamard transform in place (``H`` on every qubit).

    Radix-4 butterflies halve the number of sweeps over memory.
    """
    d = len(psi)
    h = 1
    while 4 * h <= d:
        for i in range(0, d, 4 * h):
            for j in range(i, i + h):
                a = psi[j]
                b = psi[j + h]
                c = psi[j + 2 * h]
                e = psi[j + 3 * h]
                s0 = a + b
                s1 = a - b
                s2 = c + e
                s3 = c - e
                psi[j] = s0 + s2
                psi[j + h] = s1 + s3
                psi[j + 2 * h] = s0 - s2
                psi[j + 3 * h] = s1 - s3
        h *= 4
    if h < d:
        for j in range(h):
            x = psi[j]
            y = psi[j + h]
            psi[j] = x + y
            psi[j + h] = x - y
    scale = 1.0 / math.sqrt(d)
    for k in range(d):
        psi[k] *= scale


@numba.njit(cache=True)
def _phase(psi, lev, lmin, lmax, ang):
    nl = lmax - lmin + 1
    table = np.empty(nl, dtype=np.complex128)
    for l in range(nl):
        table[l] = complex(math.cos(ang * (l + lmin)), -math.sin(ang * (l + lmin)))
    for k in range(len(psi)):
        psi[k] *= table[lev[k] - lmin]


@numba.njit(cache=True)
def _forward(psi, params, op_frame, op_lev, op_param, op_coef, op_angle, levels, lmins, lmaxs, frame):
    for t in range(len(op_frame)):
        if op_frame[t] != frame:
            fwht(psi)
            frame = op_frame[t]
        p = op_param[t]
        th = params[p] if p >= 0 else op_angle[t]
        li = op_lev[t]
        _phase(psi, levels[li], lmins[li], lmaxs[li], op_coef[t] * th)
    return frame


@numba.njit(cache=True)
def _observable(psi, frame, obs_frame, obs_lev, obs_coef, levels):
    """``H psi`` returned in the Z frame; ``psi`` is left in the Z frame too."""
    if frame != 0:
        fwht(psi)
    out = np.zeros_like(psi)
    xs = np.empty(0, dtype=np.complex128)
    for t in range(len(obs_frame)):
        lev = levels[obs_lev[t]]
        c = obs_coef[t]
        if obs_frame[t] == 0:
            for k in range(len(psi)):
                out[k] += c * lev[k] * psi[k]
    has_x = False
    for t in range(len(obs_frame)):
        if obs_frame[t] == 1:
            has_x = True
    if has_x:
        xs = psi.copy()
        fwht(xs)
        tmp = np.zeros_like(psi)
        for t in range(len(obs_frame)):
            if obs_frame[t] == 1:
                lev = levels[obs_lev[t]]
                c = obs_coef[t]
                for k in range(len(psi)):
                    tmp[k] += c * lev[k] * xs[k]
        fwht(tmp)
        out += tmp
    return out


@numba.njit(cache=True)
def _value_and_grad(
    psi, params, grad, op_frame, op_lev, op_param, op_coef, op_angle, levels, lmins, lmaxs,
    obs_frame, obs_lev, obs_coef, obs_const,
):  # fmt: skip
    frame = _forward(psi, params, op_frame, op_lev, op_param, op_coef, op_angle, levels, lmins, lmaxs, 0)
    lam = _observable(psi, frame, obs_frame, obs_lev, obs_coef, levels)
    value = obs_const
    for k in range(len(psi)):
        value += (psi[k].conjugate() * lam[k]).real
    frame = 0
    for step in range(len(op_frame)):
        t = len(op_frame) - 1 - step
        if op_frame[t] != frame:
            fwht(psi)
            fwht(lam)
            frame = op_frame[t]
        p = op_param[t]
        th = params[p] if p >= 0 else op_angle[t]
        li = op_lev[t]
        lev = levels[li]
        if p >= 0:
            acc = 0.0
            for k in range(len(psi)):
                acc += lev[k] * (lam[k].conjugate() * psi[k]).imag
            grad[p] += 2.0 * op_coef[t] * acc
        ang = -op_coef[t] * th
        _phase(psi, lev, lmins[li], lmaxs[li], ang)
        _phase(lam, lev, lmins[li], lmaxs[li], ang)
    return value


class FrameCircuit:
    """Sequence of ``exp(-i theta c D)`` gates with integer diagonals ``D`` in a frame."""

    def __init__(self, n: int):
        self.n = n
        self._levels: list[np.ndarray] = []
        self._level_ids: dict[int, int] = {}
        self.ops: list[tuple[int, int, int, float, float]] = []
        self.n_params = 0

    def level_id(self, levels: np.ndarray) -> int:
        key = id(levels)
        if key not in self._level_ids:
            self._level_ids[key] = len(self._levels)
            self._levels.append(np.asarray(levels, dtype=np.int64))
        return self._level_ids[key]

    def add(self, frame: int, levels: np.ndarray, param: int | None = None, coef: float = 1.0, angle: float = 0.0):
        if param is None:
            param = -1
        else:
            self.n_params = max(self.n_params, param + 1)
        self.ops.append((frame, self.level_id(levels), param, float(coef), float(angle)))

    def _arrays(self):
        ops = self.ops
        return (
            np.array([o[0] for o in ops], dtype=np.int64),
            np.array([o[1] for o in ops], dtype=np.int64),
            np.array([o[2] for o in ops], dtype=np.int64),
            np.array([o[3] for o in ops], dtype=np.float64),
            np.array([o[4] for o in ops], dtype=np.float64),
            np.array(self._levels, dtype=np.int64).reshape(len(self._levels), 1 << self.n),
            np.array([lv.min() for lv in self._levels], dtype=np.int64),
            np.array([lv.max() for lv in self._levels], dtype=np.int64),
        )

    def state(self, psi0, params) -> np.ndarray:
        psi = np.array(psi0, dtype=np.complex128, copy=True)
        frame = _forward(psi, np.asarray(params, dtype=float), *self._arrays(), 0)
        if frame != Z_FRAME:
            fwht(psi)
        return psi


class FrameObservable:
    """``sum_t c_t D_t + const`` with frame-diagonal integer ``D_t``."""

    def __init__(self, circuit: FrameCircuit, terms, const: float = 0.0):
        self.frames = np.array([f for f, _, _ in terms], dtype=np.int64)
        self.lev = np.array([circuit.level_id(lv) for _, lv, _ in terms], dtype=np.int64)
        self.coef = np.array([c for _, _, c in terms], dtype=np.float64)
        self.const = float(const)


def value_and_grad(circuit: FrameCircuit, obs: FrameObservable, psi0, params) -> tuple[float, np.ndarray]:
    params = np.asarray(params, dtype=float)
    if len(params) != circuit.n_params:
        raise ValueError(f"expected {circuit.n_params} parameters, got {len(params)}")
    psi = np.array(psi0, dtype=np.complex128, copy=True)
    grad = np.zeros(circuit.n_params)
    arrays = circuit._arrays()
    value = _value_and_grad(psi, params, grad, *arrays, obs.frames, obs.lev, obs.coef, obs.const)
    return float(value), grad


def expectation(circuit: FrameCircuit, obs: FrameObservable, psi0, params) -> float:
    psi = circuit.state(psi0, params)
    arrays = circuit._arrays()
    lam = _observable(psi.copy(), 0, obs.frames, obs.lev, obs.coef, arrays[5])
    return float(np.vdot(psi, lam).real + obs.const)
