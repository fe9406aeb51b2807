"""Hamiltonians, ansatz builders, random targets and graph ensembles."""

from __future__ import annotations

import math

import networkx as nx
import numpy as np

from .circuits import Circuit
from .lie import LieBasis, chain_sum, g0_basis
from .pauli import PauliString, PauliSum


# ---------------------------------------------------------------------------
# Hamiltonians


def random_fields(n: int, xi: float, rng) -> np.ndarray:
    return rng.normal(0.0, xi, size=n) if xi > 0 else np.zeros(n)


def tfxy_hamiltonian(n: int, fields=None) -> PauliSum:
    """``sum_j (X_j X_{j+1} + Y_j Y_{j+1}) + sum_j b_j Z_j``."""
    h = chain_sum(n, "X", "X") + chain_sum(n, "Y", "Y")
    if fields is not None:
        h = h + PauliSum(n, [(float(b), PauliString.single(n, "Z", j + 1)) for j, b in enumerate(fields)])
    return h


def tfxy_even_ground_energy(fields) -> float:
    """Lowest energy of the TFXY chain among even Z-parity states, via Jordan-Wigner free fermions.

    The chain conserves fermion number N and Z-parity is (-1)^N.  The hopping matrix has
    2 on the off-diagonals and -2 b_j on the diagonal, plus the constant sum(b).
    """
    b = np.asarray(fields, dtype=float)
    n = len(b)
    m = np.diag(-2.0 * b) + 2.0 * (np.eye(n, k=1) + np.eye(n, k=-1))
    eps = np.linalg.eigvalsh(m)
    filled = np.cumsum(np.concatenate([[0.0], eps]))  # filled[k]: energy of the k lowest modes
    return float(b.sum() + filled[0::2].min())


def tfim_hamiltonian(n: int, h_xx: float = 1.0, h_z: float = -1.0) -> PauliSum:
    return chain_sum(n, "X", "X", coef=h_xx) + chain_sum(n, "Z", coef=h_z)


def ltfim_hamiltonian(n: int, h_xx: float = 1.0, h_z: float = -1.0, h_x: float = -1.0) -> PauliSum:
    return tfim_hamiltonian(n, h_xx, h_z) + chain_sum(n, "X", coef=h_x)


def hs1_norm(h: PauliSum) -> float:
    """Normalized Hilbert-Schmidt norm ``sqrt(Tr H^2 / 2^n)`` of the traceless part."""
    return h.without_identity()[0].norm()


# ---------------------------------------------------------------------------
# ansaetze


def _z(n: int, j: int) -> PauliString:
    return PauliString.single(n, "Z", j)


def _pair(n: int, a: str, b: str, j: int) -> PauliString:
    return PauliString.from_ops(n, {j: a, j + 1: b})


def hva_tfxy_layer(n: int) -> list[PauliString]:
    """One HVA layer for the TFXY model: ``Z_j`` gates then ``XX``/``YY`` on each bond (3n - 2 gates)."""
    gens = [_z(n, j) for j in range(1, n + 1)]
    for j in range(1, n):
        gens += [_pair(n, "X", "X", j), _pair(n, "Y", "Y", j)]
    return gens


def two_local_layer(n: int) -> list[PauliString]:
    """One layer of the 2-local ansatz: ``Z_j`` then ``XX, YY, XY, YX`` per bond (5n - 4 gates)."""
    gens = [_z(n, j) for j in range(1, n + 1)]
    for j in range(1, n):
        gens += [_pair(n, a, b, j) for a, b in ("XX", "YY", "XY", "YX")]
    return gens


def layered_circuit(n: int, layer: list[PauliString], n_gates: int) -> Circuit:
    """Repeat ``layer`` until exactly ``n_gates`` gates, each with its own parameter."""
    c = Circuit(n)
    for k in range(n_gates):
        c.gate(layer[k % len(layer)])
    return c


def hva_tfxy_circuit(n: int, n_params: int) -> Circuit:
    return layered_circuit(n, hva_tfxy_layer(n), n_params)


def two_local_circuit(n: int, layers: int) -> Circuit:
    layer = two_local_layer(n)
    return layered_circuit(n, layer, layers * len(layer))


def overparametrized_layers(n: int, layer_size: int, factor: float = 2.0) -> int:
    """Smallest layer count with at least ``factor * dim(g0)`` parameters."""
    return math.ceil(factor * n * (2 * n - 1) / layer_size)


def utfim_circuit(n: int, layers: int, with_longitudinal: bool = False) -> Circuit:
    """Layers ``exp(-i a sum XX) exp(-i b sum Z)`` (the ``Z`` sum acts first).

    With ``with_longitudinal`` each layer starts with an extra ``exp(-i phi sum X)``;
    that circuit leaves the free-fermion algebra and is simulated by statevector.
    """
    c = Circuit(n)
    xx, z, x = chain_sum(n, "X", "X"), chain_sum(n, "Z"), chain_sum(n, "X")
    for _ in range(layers):
        if with_longitudinal:
            c.gate(x)
        c.gate(z)
        c.gate(xx)
    return c


def qaoa_path_circuit(n: int, layers: int) -> Circuit:
    """Path-graph QAOA in the Hadamard-rotated frame.

    The cost ``1/2 sum (Z Z - 1)`` becomes ``1/2 sum X X`` (up to a constant) and
    the mixer ``sum X`` becomes ``sum Z``; parameters alternate (gamma, beta).
    """
    c = Circuit(n)
    cost, mixer = chain_sum(n, "X", "X", coef=0.5), chain_sum(n, "Z")
    for _ in range(layers):
        c.gate(cost)
        c.gate(mixer)
    return c


# ---------------------------------------------------------------------------
# random targets


def random_algebra_hamiltonian(basis: LieBasis, rng, max_weight: int | None = None) -> PauliSum:
    """``sum_a w_a B_a`` with ``w`` uniform on the unit sphere over the selected elements.

    ``max_weight`` restricts the sum to basis strings acting on at most that
    many qubits (``2`` gives the 2-local targets).
    """
    idx = np.arange(basis.dim)
    if max_weight is not None:
        idx = idx[basis.weight_array() <= max_weight]
    if len(idx) == 0:
        raise ValueError("no basis elements satisfy the locality filter")
    w = rng.normal(size=len(idx))
    w /= np.linalg.norm(w)
    return PauliSum(basis.n, [(float(c), basis[int(i)]) for c, i in zip(w, idx)])


def random_free_fermion_target(n: int, rng, max_weight: int | None = None) -> PauliSum:
    return random_algebra_hamiltonian(g0_basis(n), rng, max_weight)


# ---------------------------------------------------------------------------
# graphs


class GraphError(ValueError):
    """Graph is not simple or has labels outside ``1..n``."""


def check_simple_graph(n: int, edges) -> list[tuple[int, int]]:
    """Normalize an edge list (1-indexed, ``a < b``) and reject loops, duplicates and bad labels."""
    seen = set()
    for a, b in edges:
        if not (1 <= a <= n and 1 <= b <= n):
            raise GraphError(f"edge ({a}, {b}) outside 1..{n}")
        if a == b:
            raise GraphError(f"self-loop on vertex {a}")
        key = (min(a, b), max(a, b))
        if key in seen:
            raise GraphError(f"duplicate edge {key}")
        seen.add(key)
    if not seen:
        raise GraphError("graph has no edges")
    return sorted(seen)


def random_graph(n: int, ensemble: str, seed: int, edge_prob: float = 0.3) -> list[tuple[int, int]]:
    """Edge list of a 3-regular or Erdos-Renyi graph; empty ER draws are redrawn."""
    rng = np.random.default_rng(seed)
    while True:
        s = int(rng.integers(2**31))
        if ensemble == "regular3":
            g = nx.random_regular_graph(3, n, seed=s)
        elif ensemble == "erdos_renyi":
            g = nx.gnp_random_graph(n, edge_prob, seed=s)
        else:
            raise ValueError(f"unknown graph ensemble {ensemble!r}")
        if g.number_of_edges():
            return check_simple_graph(n, [(a + 1, b + 1) for a, b in g.edges()])


def max_cut_value(n: int, edges) -> int:
    from .statevector import cut_levels

    return int(cut_levels(n, edges).max())
