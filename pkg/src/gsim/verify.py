"""Small-n cross-checks of each experiment's simulation path against the dense oracle.

``verify_experiment(cfg)`` shrinks the configured system to at most 8 qubits,
runs the same building blocks the experiment uses, and compares them with
statevector, density-matrix or dense-unitary references.  The CLI runs these
before a full run when ``--verify`` is given.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from . import oracle
from .circuits import Circuit, NoiseChannel, _sign_table, adjoint_matrix, evolve, target_adjoint
from .experiments import (
    TWO_PI, _trotter_step, _two_site_codes, anderson_hamiltonian, ltfim_frame_circuit, ltfim_observable,
    pair_channel, pair_noise_probs, position_moment, qaoa_frame_circuit, stream,
)  # fmt: skip
from .fidelity import free_fermion_hst_loss
from .gradients import grad_compilation, grad_expectation
from .lie import chain_sum, g0_basis
from .models import (
    hva_tfxy_circuit, hva_tfxy_layer, layered_circuit, ltfim_hamiltonian, qaoa_path_circuit,
    random_algebra_hamiltonian, random_fields, random_graph, tfxy_hamiltonian, two_local_circuit, utfim_circuit,
)  # fmt: skip
from .pauli import PauliString, PauliSum
from .states import StateSpec, correlation_matrix, expectation_vector
from .statevector import value_and_grad

MAX_VERIFY_QUBITS = 8


@dataclass
class Check:
    name: str
    error: float
    tol: float

    @property
    def ok(self) -> bool:
        return bool(np.isfinite(self.error) and self.error <= self.tol)

    def row(self) -> dict:
        return dict(check=self.name, error=self.error, tol=self.tol, ok=self.ok)


def _basis_values(psi: np.ndarray, basis) -> np.ndarray:
    return oracle.expectation_vector_dense(psi, basis)


def check_evolution(circuit, spec: StateSpec, rng, name: str) -> Check:
    """g-sim expectation vector after the circuit vs the statevector oracle."""
    basis = g0_basis(circuit.n)
    params = rng.uniform(0, TWO_PI, circuit.n_params)
    e = evolve(expectation_vector(spec, basis), circuit, params, basis)
    ref = _basis_values(oracle.sv_evolve(spec.statevector(), circuit, params), basis)
    return Check(name, float(np.abs(e - ref).max()), 1e-10)


def _relative_fd_error(fun, theta, grad, h=1e-6) -> float:
    fd = np.empty_like(theta)
    for k in range(len(theta)):
        d = np.zeros_like(theta)
        d[k] = h
        fd[k] = (fun(theta + d) - fun(theta - d)) / (2 * h)
    return float(np.abs(fd - grad).max() / max(1.0, np.abs(fd).max()))


def check_energy_gradient(circuit, h, rng, name: str) -> Check:
    basis = g0_basis(circuit.n)
    w, _ = basis.weights(h)
    e0 = expectation_vector(StateSpec.zeros(circuit.n), basis)
    theta = rng.uniform(0, TWO_PI, circuit.n_params)
    g = grad_expectation(circuit, theta, e0, w, basis).values
    return Check(name, _relative_fd_error(lambda t: w @ evolve(e0, circuit, t, basis), theta, g), 1e-6)


def check_compilation_gradient(circuit, v_bar, rng, name: str) -> Check:
    basis = g0_basis(circuit.n)
    theta = rng.uniform(0, TWO_PI, circuit.n_params)
    g = grad_compilation(circuit, theta, v_bar, basis).values
    return Check(name, _relative_fd_error(lambda t: grad_compilation(circuit, t, v_bar, basis).loss, theta, g), 1e-6)


# ---------------------------------------------------------------------------
# per-experiment suites


def _verify_benchmark(cfg, n, rng):
    circuit = two_local_circuit(n, 1)
    return [check_evolution(circuit, StateSpec.zeros(n), rng, f"two-local layer evolution n={n}")]


def _verify_magic(cfg, n, rng):
    n = 4  # one magic block; small enough for the density-matrix reference
    fields = random_fields(n, cfg.xi, rng)
    basis = g0_basis(n)
    spec = StateSpec.magic(n, cfg.tau)
    checks = [
        Check(f"magic state expectations n={n}",
              float(np.abs(expectation_vector(spec, basis) - _basis_values(spec.statevector(), basis)).max()), 1e-12)
    ]  # fmt: skip
    step, pairs = _trotter_step(n, cfg.dt, fields, True)
    prog = step.program(basis)
    probs = pair_noise_probs(rng, len(pairs), max(cfg.noise_p, 0.05))
    tab = (probs @ _sign_table(2)[_two_site_codes()]).ravel()
    e = expectation_vector(spec, basis)
    replace(prog, ch_tab=tab).run(e, np.zeros(0))

    # the same step with the sampled channels written out term by term
    explicit = Circuit(n)
    rows = iter(zip(pairs, probs))
    for el in step.elements:
        if isinstance(el, NoiseChannel):
            (j, _), row = next(rows)
            el = pair_channel(n, j, row)
        explicit.elements.append(el)
    psi = spec.statevector()
    rho = oracle.dm_noisy_evolve(np.outer(psi, psi.conj()), explicit, np.zeros(0))
    ref = np.array([oracle.dm_expectation(rho, p) for p in basis])
    checks.append(Check(f"noisy Trotter step vs density matrix n={n}", float(np.abs(e - ref).max()), 1e-12))
    return checks


def _verify_overparam(cfg, n, rng):
    circuit = hva_tfxy_circuit(n, max(1, n * (2 * n - 1) // 2))
    h = tfxy_hamiltonian(n, random_fields(n, cfg.xi, rng))
    return [
        check_evolution(circuit, StateSpec.zeros(n), rng, f"TFXY HVA evolution n={n}"),
        check_energy_gradient(circuit, h, rng, f"TFXY energy gradient n={n}"),
    ]


def _verify_ltfim(cfg, n, rng):
    layers = 3
    stage1 = utfim_circuit(n, layers)
    checks = [
        check_evolution(stage1, StateSpec.zeros(n), rng, f"shared-angle TFIM evolution n={n}"),
        check_energy_gradient(stage1, chain_sum(n, "X", "X", coef=cfg.h_xx) + chain_sum(n, "Z", coef=cfg.h_z), rng,
                              f"TFIM energy gradient n={n}"),
    ]  # fmt: skip
    fc, lv = ltfim_frame_circuit(n, layers)
    params = rng.uniform(0, TWO_PI, fc.n_params)
    full = utfim_circuit(n, layers, with_longitudinal=True)
    psi0 = oracle.zero_state(n)
    psi_ref = oracle.sv_evolve(psi0, full, params)
    h_x = cfg.h_x_values[0]
    obs = ltfim_observable(fc, lv, cfg.h_xx, cfg.h_z, h_x)
    val, grad = value_and_grad(fc, obs, psi0, params)
    h = ltfim_hamiltonian(n, cfg.h_xx, cfg.h_z, h_x)
    checks.append(Check(f"LTFIM frame circuit state n={n}", float(np.abs(fc.state(psi0, params) - psi_ref).max()), 1e-10))
    checks.append(Check(f"LTFIM energy n={n}", abs(val - oracle.sv_expectation(psi_ref, h)), 1e-10))
    fd = _relative_fd_error(lambda t: value_and_grad(fc, obs, psi0, t)[0], params, grad)
    checks.append(Check(f"LTFIM energy gradient n={n}", fd, 1e-6))
    return checks


def _verify_qaoa(cfg, n, rng):
    layers = 3
    circuit = qaoa_path_circuit(n, layers)
    basis = g0_basis(n)
    theta = rng.uniform(0, TWO_PI, circuit.n_params)
    w, _ = basis.weights(chain_sum(n, "X", "X", coef=0.5))
    gsim = float(w @ evolve(expectation_vector(StateSpec.zeros(n), basis), circuit, theta, basis)) - (n - 1) / 2
    path = [(j, j + 1) for j in range(1, n)]
    fc, obs = qaoa_frame_circuit(n, path, layers)
    full = np.zeros(3 * layers)
    full[1::3], full[2::3] = theta[0::2], theta[1::2]
    plus = np.full(1 << n, 2.0 ** (-n / 2), dtype=complex)
    stage2 = value_and_grad(fc, obs, plus, full)[0]
    checks = [Check(f"path QAOA: Hadamard-frame g-sim vs statevector n={n}", abs(gsim - stage2), 1e-10)]
    edges = random_graph(n, cfg.ensemble if n % 2 == 0 or cfg.ensemble != "regular3" else "erdos_renyi",
                         int(rng.integers(2**31)), cfg.edge_prob)  # fmt: skip
    fc, obs = qaoa_frame_circuit(n, edges, layers)
    params = rng.uniform(0, TWO_PI, fc.n_params)
    val, grad = value_and_grad(fc, obs, plus, params)
    checks.append(Check(f"QAOA energy gradient n={n}",
                        _relative_fd_error(lambda t: value_and_grad(fc, obs, plus, t)[0], params, grad), 1e-6))  # fmt: skip
    return checks


def _verify_compile(cfg, n, rng):
    basis = g0_basis(n)
    checks = []
    if cfg.mode == "random_target":
        circuit = two_local_circuit(n, 1)
        h = random_algebra_hamiltonian(basis, rng, cfg.locality)
        t = cfg.t_values[0]
    else:
        circuit = layered_circuit(n, hva_tfxy_layer(n), 2 * (3 * n - 2))
        h = anderson_hamiltonian(n, cfg.xi_values[-1], cfg.seed)
        t = min(cfg.t_final, 1.0)
        spec = StateSpec.computational("1" + "0" * (n - 1))
        u = target_adjoint(h, t, basis)
        z_idx = np.array([basis.index_of(PauliString.single(n, "Z", j)) for j in range(1, n + 1)])
        mom = position_moment(u @ expectation_vector(spec, basis), u @ correlation_matrix(spec, basis) @ u.T, z_idx)
        psi = scipy.linalg.expm(-1j * t * h.to_matrix()) @ spec.statevector()
        k = np.arange(1 << n)
        position = sum((j - 1) * ((k >> (j - 1)) & 1) for j in range(1, n + 1))
        ref = float(np.abs(psi) ** 2 @ position.astype(float) ** 2)
        checks.append(Check(f"<N^2> from correlators vs statevector n={n}", abs(mom - ref), 1e-10))
    v_bar = target_adjoint(h, t, basis)
    checks.append(check_compilation_gradient(circuit, v_bar, rng, f"compilation gradient n={n}"))
    # near the identity the loss is well inside (0, 1), where the comparison is informative
    theta = rng.normal(0, 0.5 / np.sqrt(circuit.n_params), circuit.n_params)
    t_near = 0.1
    dense = oracle.hst_loss(circuit, theta, scipy.linalg.expm(-1j * t_near * h.to_matrix()))
    majorana = free_fermion_hst_loss(circuit, theta, h, t_near)
    checks.append(Check(f"Majorana HST vs dense HST n={n} (loss {dense:.3f})", abs(majorana - dense), 1e-10))
    theta = rng.uniform(0, TWO_PI, circuit.n_params)
    u = adjoint_matrix(circuit, theta, basis)
    e0 = expectation_vector(StateSpec.zeros(n), basis)
    ref = _basis_values(oracle.sv_evolve(StateSpec.zeros(n).statevector(), circuit, theta), basis)
    checks.append(Check(f"adjoint matrix vs statevector n={n}", float(np.abs(u @ e0 - ref).max()), 1e-10))
    return checks


def _verify_classifier(cfg, n, rng):
    basis = g0_basis(n)
    vqe = utfim_circuit(n, 2)
    model = layered_circuit(n, hva_tfxy_layer(n), 2 * (3 * n - 2))
    theta_vqe = rng.uniform(0, TWO_PI, vqe.n_params)
    theta = rng.uniform(0, TWO_PI, model.n_params)
    h = random_algebra_hamiltonian(basis, rng)
    t = cfg.disguise_t
    e = target_adjoint(h, t, basis) @ evolve(expectation_vector(StateSpec.zeros(n), basis), vqe, theta_vqe, basis)
    w = basis.unit(PauliString.single(n, "Z", 1))
    pulled = w.copy()
    model.program(basis).run(pulled, theta, inverse=True)
    score = float(pulled @ e)
    psi = oracle.sv_evolve(oracle.zero_state(n), vqe, theta_vqe)
    psi = scipy.linalg.expm(-1j * t * h.to_matrix()) @ psi
    psi = oracle.sv_evolve(psi, model, theta)
    ref = oracle.sv_expectation(psi, PauliSum.single(PauliString.single(n, "Z", 1)))
    return [
        check_evolution(model, StateSpec.zeros(n), rng, f"classifier ansatz evolution n={n}"),
        Check(f"disguised classifier score vs statevector n={n}", abs(score - ref), 1e-10),
    ]


_SUITES = {
    "benchmark": _verify_benchmark,
    "magic": _verify_magic,
    "overparam": _verify_overparam,
    "ltfim": _verify_ltfim,
    "qaoa": _verify_qaoa,
    "compile": _verify_compile,
    "classifier": _verify_classifier,
}


def verification_size(cfg) -> int:
    sizes = [getattr(cfg, "n", None)] + list(getattr(cfg, "n_values", []) or [])
    sizes = [s for s in sizes if s]
    return max(2, min(min(sizes) if sizes else 4, MAX_VERIFY_QUBITS, 6))


def verify_experiment(cfg) -> list[Check]:
    n = verification_size(cfg)
    if cfg.experiment == "qaoa":
        n = max(n, 4)
    return _SUITES[cfg.experiment](cfg, n, stream(cfg.seed, "verify"))
