"""Reverse-mode gradients in the adjoint picture.

For an op ``R = exp(phi K)`` sitting between the forward-evolved state
description ``eta`` (taken after the op) and the backward-evolved observable
weights ``phi_w``, the derivative of ``w . e_out`` with respect to the op's
angle is ``phi_w^T K eta``.  With couplings ``(a, b, s)`` and ``K[a, b] = -2s``
this is ``sum 2 s (phi_w[b] eta[a] - phi_w[a] eta[b])``, an O(dim) sum.  Both
vectors are then rotated back through the op, so the whole sweep costs a
couple of forward passes.  Noise channels are parameter free: the backward
pass restores ``eta`` from snapshots taken in the forward pass and multiplies
``phi_w`` by the channel diagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .circuits import Circuit, NoiseNotSupportedError, adjoint_matrix
from .lie import LieBasis


@dataclass
class GradientResult:
    values: np.ndarray
    loss: float


@numba.njit(cache=True)
def _rot1(v, c, sn, lo, hi, g_a, g_b, g_s):
    for k in range(lo, hi):
        i = g_a[k]
        j = g_b[k]
        ss = g_s[k] * sn
        x = v[i]
        y = v[j]
        v[i] = c * x - ss * y
        v[j] = ss * x + c * y


@numba.njit(cache=True)
def _grad_expectation_kernel(
    eta, phi, params, grad, snaps,
    op_kind, op_ref, op_param, op_coef, op_angle,
    g_ptr, g_a, g_b, g_s,
    ch_sup, ch_off, ch_tab, sup_ptr, sup_idx, sup_code,
):  # fmt: skip
    n_ops = len(op_kind)
    n_noise = 0
    # forward sweep
    for t in range(n_ops):
        if op_kind[t] == 0:
            p = op_param[t]
            ang = op_coef[t] * (params[p] if p >= 0 else op_angle[t])
            g = op_ref[t]
            _rot1(eta, math.cos(2.0 * ang), math.sin(2.0 * ang), g_ptr[g], g_ptr[g + 1], g_a, g_b, g_s)
        else:
            snaps[n_noise, :] = eta
            n_noise += 1
            ch = op_ref[t]
            s = ch_sup[ch]
            off = ch_off[ch]
            for k in range(sup_ptr[s], sup_ptr[s + 1]):
                eta[sup_idx[k]] *= ch_tab[off + sup_code[k]]
    value = 0.0
    for i in range(len(eta)):
        value += phi[i] * eta[i]
    # backward sweep
    for step in range(n_ops):
        t = n_ops - 1 - step
        if op_kind[t] == 0:
            p = op_param[t]
            g = op_ref[t]
            lo = g_ptr[g]
            hi = g_ptr[g + 1]
            if p >= 0:
                acc = 0.0
                for k in range(lo, hi):
                    i = g_a[k]
                    j = g_b[k]
                    acc += 2.0 * g_s[k] * (phi[j] * eta[i] - phi[i] * eta[j])
                grad[p] += op_coef[t] * acc
            ang = op_coef[t] * (params[p] if p >= 0 else op_angle[t])
            c = math.cos(2.0 * ang)
            sn = -math.sin(2.0 * ang)
            _rot1(eta, c, sn, lo, hi, g_a, g_b, g_s)
            _rot1(phi, c, sn, lo, hi, g_a, g_b, g_s)
        else:
            n_noise -= 1
            eta[:] = snaps[n_noise, :]
            ch = op_ref[t]
            s = ch_sup[ch]
            off = ch_off[ch]
            for k in range(sup_ptr[s], sup_ptr[s + 1]):
                phi[sup_idx[k]] *= ch_tab[off + sup_code[k]]
    return value


def grad_expectation(circuit: Circuit, params, e_in, w, basis: LieBasis) -> GradientResult:
    """Value and gradient of ``w . e_out``; shared parameters sum their contributions."""
    params = circuit.check_params(params)
    prog = circuit.program(basis)
    eta = np.array(e_in, dtype=float, copy=True)
    phi = np.array(w, dtype=float, copy=True)
    if eta.shape != (basis.dim,) or phi.shape != (basis.dim,):
        raise ValueError("state and weight vectors must match the basis dimension")
    n_noise = int(np.count_nonzero(prog.op_kind == 1))
    snaps = np.empty((n_noise, basis.dim))
    grad = np.zeros(circuit.n_params)
    value = _grad_expectation_kernel(eta, phi, params, grad, snaps, *prog.kernel_args())
    return GradientResult(grad, float(value))


def compilation_loss(u_bar: np.ndarray, v_bar: np.ndarray) -> float:
    """``1 - Tr(U^T V) / dim``, equal to ``||U - V||^2 / (2 dim)`` for orthogonal matrices."""
    if u_bar.shape != v_bar.shape:
        raise ValueError(f"shape mismatch {u_bar.shape} vs {v_bar.shape}")
    return float(1.0 - np.vdot(u_bar, v_bar).real / u_bar.shape[0])


# reassociation lets the per-pair dot product vectorize; NaN/Inf semantics stay strict
@numba.njit(cache=True, fastmath={"reassoc", "contract"})
def _grad_compilation_kernel(
    right, left, params, grad,
    op_kind, op_ref, op_param, op_coef, op_angle, g_ptr, g_a, g_b, g_s,
):  # fmt: skip
    # The Givens pairs of one Pauli generator are disjoint, so each pair's
    # gradient contribution is read off the pre-rotation rows in the same pass.
    n_ops = len(op_kind)
    dim = right.shape[0]
    m = right.shape[1]
    for step in range(n_ops):
        t = n_ops - 1 - step
        p = op_param[t]
        g = op_ref[t]
        ang = op_coef[t] * (params[p] if p >= 0 else op_angle[t])
        c = math.cos(2.0 * ang)
        sn = -math.sin(2.0 * ang)
        acc = 0.0
        for k in range(g_ptr[g], g_ptr[g + 1]):
            ss = g_s[k] * sn
            r_i, r_j = right[g_a[k]], right[g_b[k]]
            l_i, l_j = left[g_a[k]], left[g_b[k]]
            d = 0.0
            for col in range(m):
                ri, rj, li, lj = r_i[col], r_j[col], l_i[col], l_j[col]
                d += lj * ri - li * rj
                r_i[col] = c * ri - ss * rj
                r_j[col] = ss * ri + c * rj
                l_i[col] = c * li - ss * lj
                l_j[col] = ss * li + c * lj
            acc += 2.0 * g_s[k] * d
        if p >= 0:
            grad[p] -= op_coef[t] * acc / dim


def grad_compilation(circuit: Circuit, params, v_bar: np.ndarray, basis: LieBasis) -> GradientResult:
    """Value and gradient of the adjoint-space compilation loss against ``v_bar``.

    The sweep keeps the partial product ``U_{1:m}`` (``right``) and
    ``U_{m+1:M}^T V`` (``left``) and peels one gate off both per step, so it
    only ever performs Givens rotations on dense rows.
    """
    if circuit.has_noise:
        raise NoiseNotSupportedError("compilation gradients need a unitary-only circuit")
    params = circuit.check_params(params)
    u = adjoint_matrix(circuit, params, basis)
    loss = compilation_loss(u, v_bar)
    prog = circuit.program(basis)
    grad = np.zeros(circuit.n_params)
    left = np.array(v_bar, dtype=float, copy=True)
    _grad_compilation_kernel(
        u, left, params, grad,
        prog.op_kind, prog.op_ref, prog.op_param, prog.op_coef, prog.op_angle,
        prog.g_ptr, prog.g_a, prog.g_b, prog.g_s,
    )  # fmt: skip
    return GradientResult(grad, loss)
