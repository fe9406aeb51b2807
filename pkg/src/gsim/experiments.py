"""Desk-scale versions of the simulation studies.

Every ``run_*`` function takes a validated config (see :mod:`gsim.config`) and
returns an :class:`ExperimentResult`: named tables of flat rows (written as
CSV by the CLI) plus a summary dict (written to the JSON manifest).  Random
streams are derived from ``(config.seed, instance keys)`` so a run is fully
determined by its config.
"""

from __future__ import annotations

import math
import time
import tracemalloc
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from . import oracle
from .circuits import Circuit, NoiseChannel, _local_code, _sign_table, adjoint_matrix, evolve, target_adjoint
from .config import (
    BenchmarkConfig, ClassifierConfig, CompileConfig, LtfimConfig, MagicConfig, OverparamConfig, QaoaConfig,
)  # fmt: skip
from .fidelity import free_fermion_hst_loss
from .gradients import grad_expectation
from .lie import LieBasis, chain_sum, g0_basis, majorana_basis
from .models import (
    check_simple_graph, hs1_norm, hva_tfxy_circuit, hva_tfxy_layer, layered_circuit, ltfim_hamiltonian,
    max_cut_value, overparametrized_layers, qaoa_path_circuit, random_algebra_hamiltonian, random_fields,
    random_graph, tfim_hamiltonian, tfxy_even_ground_energy, tfxy_hamiltonian, two_local_circuit, utfim_circuit,
)  # fmt: skip
from .optimize import AnnealSchedule, OptimizerConfig, anneal_compile, compilation_objective, minimize
from .pauli import PauliString, PauliSum
from .states import StateSpec, correlation_matrix, expectation_vector
from .statevector import (
    X_FRAME, Z_FRAME, FrameCircuit, FrameObservable, cut_levels, sum_z_levels, value_and_grad, zz_levels,
)  # fmt: skip

TWO_PI = 2.0 * math.pi


@dataclass
class ExperimentResult:
    experiment: str
    tables: dict[str, list[dict]] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)


def stream(seed: int, *keys) -> np.random.Generator:
    """Independent generator for one instance; keys are ints or short strings."""
    words = [int(seed)]
    for k in keys:
        if isinstance(k, str):
            words += [ord(c) for c in k]
        else:
            words.append(int(round(float(k) * 1000)) & 0xFFFFFFFF)
    return np.random.default_rng(words)


def parallel_map(fn, tasks: list, threads: int = 1) -> list:
    """``[fn(t) for t in tasks]``, optionally over a process pool; order is preserved."""
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks))


def expectation_objective(circuit: Circuit, e_in: np.ndarray, w: np.ndarray, basis: LieBasis, const: float = 0.0):
    def fun(theta):
        r = grad_expectation(circuit, theta, e_in, w, basis)
        return r.loss + const, r.values

    return fun


def loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


# ---------------------------------------------------------------------------
# benchmark


def _footprint_bytes(basis: LieBasis, prog) -> int:
    arrays = [basis.x_words, basis.z_words, prog.g_a, prog.g_b, prog.g_s, prog.op_kind, prog.op_ref]
    return int(sum(a.nbytes for a in arrays) + 8 * basis.dim)


def run_benchmark(cfg: BenchmarkConfig) -> ExperimentResult:
    """Per-gate time of one 2-local TFXY ansatz layer applied to ``|0>``, plus memory."""
    rows = []
    # compile kernels before measuring anything
    warm = two_local_circuit(2, 1)
    evolve(expectation_vector(StateSpec.zeros(2), g0_basis(2)), warm, np.zeros(warm.n_params), g0_basis(2))
    for n in cfg.n_values:
        tracemalloc.start()
        basis = g0_basis(n)
        circuit = two_local_circuit(n, 1)
        prog = circuit.program(basis)
        e0 = expectation_vector(StateSpec.zeros(n), basis)
        params = stream(cfg.seed, "bench", n).uniform(0, TWO_PI, circuit.n_params)
        evolve(e0, circuit, params, basis)
        peak = tracemalloc.get_traced_memory()[1]
        tracemalloc.stop()
        per_gate = []
        for _ in range(cfg.batches):
            t0 = time.perf_counter()
            for _ in range(cfg.repeats):
                evolve(e0, circuit, params, basis)
            per_gate.append((time.perf_counter() - t0) / (cfg.repeats * len(circuit.gates)))
        rows.append(
            dict(
                n=n, dim=basis.dim, gates=len(circuit.gates), couplings=len(prog.g_a),
                time_per_gate=float(np.median(per_gate)), time_per_gate_min=float(np.min(per_gate)),
                footprint_mb=_footprint_bytes(basis, prog) / 2**20, peak_mb=peak / 2**20,
            )
        )  # fmt: skip
    summary = {"n_values": list(cfg.n_values)}
    if len(rows) > 1:
        summary["time_slope"] = loglog_slope([r["n"] for r in rows], [r["time_per_gate"] for r in rows])
    summary["peak_mb"] = {r["n"]: r["peak_mb"] for r in rows}
    return ExperimentResult("benchmark", {"benchmark": rows}, summary)


# ---------------------------------------------------------------------------
# magic-state demo


def _trotter_step(n: int, dt: float, fields, channel_pairs: bool) -> tuple[Circuit, list[tuple[int, int]]]:
    step = Circuit(n)
    pairs = []
    identity = PauliString.identity(n)
    for j in range(1, n):
        for a in "XY":
            step.gate(PauliString.from_ops(n, {j: a, j + 1: a}), angle=dt)
            if channel_pairs:
                # placeholder weights; every step installs freshly sampled tables
                step.noise(NoiseChannel([(1.0, identity), (0.0, PauliString.from_ops(n, {j: "Z", j + 1: "Z"}))]))
                pairs.append((j, j + 1))
    for j in range(1, n + 1):
        step.gate(PauliString.single(n, "Z", j), angle=dt * float(fields[j - 1]))
    return step, pairs


_TWO_SITE_LABELS = [a + b for a in "IXYZ" for b in "IXYZ"]


def _two_site_codes() -> np.ndarray:
    """Local codes of the 16 two-site Paulis in :meth:`NoiseChannel.random_two_qubit` order."""
    codes = []
    for lab in _TWO_SITE_LABELS:
        ops = {q: c for q, c in zip((1, 2), lab) if c != "I"}
        codes.append(_local_code(PauliString.from_ops(2, ops), (1, 2)))
    return np.array(codes)


def pair_noise_probs(rng, n_pairs: int, p: float) -> np.ndarray:
    """Rows of two-site Pauli probabilities: identity ``1 - p``, the other 15 uniform weights scaled to ``p``."""
    w = rng.uniform(0.0, 1.0, size=(n_pairs, 15))
    w *= p / w.sum(axis=1, keepdims=True)
    return np.concatenate([np.full((n_pairs, 1), 1.0 - p), w], axis=1)


def pair_channel(n: int, j: int, probs) -> NoiseChannel:
    """Explicit channel on qubits ``(j, j+1)`` from one row of :func:`pair_noise_probs`."""
    terms = []
    for prob, lab in zip(probs, _TWO_SITE_LABELS):
        terms.append((float(prob), PauliString.from_ops(n, {q: c for q, c in zip((j, j + 1), lab) if c != "I"})))
    return NoiseChannel(terms)


def run_magic_demo(cfg: MagicConfig) -> ExperimentResult:
    """Trotterized TFXY dynamics from the magic state, with and without 2-qubit Pauli noise."""
    n = cfg.n
    fields = random_fields(n, cfg.xi, stream(cfg.seed, "fields"))
    basis = g0_basis(n)
    spec = StateSpec.magic(n, cfg.tau)
    e0 = expectation_vector(spec, basis)
    corr_idx = np.array([basis.index_of(PauliString.from_ops(n, {j: "Y", j + 1: "X"})) for j in range(1, n)])
    no_params = np.zeros(0)

    clean_step, _ = _trotter_step(n, cfg.dt, fields, False)
    clean_prog = clean_step.program(basis)
    traces = {"noiseless": np.empty((cfg.steps + 1, n - 1))}
    walls = {}
    t0 = time.perf_counter()
    e = e0.copy()
    traces["noiseless"][0] = e[corr_idx]
    for s in range(cfg.steps):
        clean_prog.run(e, no_params)
        traces["noiseless"][s + 1] = e[corr_idx]
    walls["noiseless"] = time.perf_counter() - t0

    if cfg.noisy:
        noisy_step, pairs = _trotter_step(n, cfg.dt, fields, True)
        prog = noisy_step.program(basis)
        chi = _sign_table(2)[_two_site_codes()]  # (16 terms, 16 local codes)
        rng = stream(cfg.seed, "noise")
        traces["noisy"] = np.empty((cfg.steps + 1, n - 1))
        t0 = time.perf_counter()
        e = e0.copy()
        traces["noisy"][0] = e[corr_idx]
        for s in range(cfg.steps):
            tab = (pair_noise_probs(rng, len(pairs), cfg.noise_p) @ chi).ravel()
            replace(prog, ch_tab=tab).run(e, no_params)
            traces["noisy"][s + 1] = e[corr_idx]
        walls["noisy"] = time.perf_counter() - t0

    rows = []
    for s in range(cfg.steps + 1):
        for j in range(1, n):
            row = dict(t=s * cfg.dt, step=s, j=j, noiseless=float(traces["noiseless"][s, j - 1]))
            if cfg.noisy:
                row["noisy"] = float(traces["noisy"][s, j - 1])
            rows.append(row)

    window = max(1, cfg.steps // 10)
    far = {k: float(np.abs(v[-window:, -1]).max()) for k, v in traces.items()}
    summary = dict(n=n, tau=cfg.tau, xi=cfg.xi, fields=fields.tolist(), wall_seconds=walls, far_end_max=far)
    if cfg.noisy:
        summary["far_end_suppression"] = far["noiseless"] / far["noisy"] if far["noisy"] > 0 else math.inf
    return ExperimentResult("magic", {"correlators": rows}, summary)


# ---------------------------------------------------------------------------
# overparametrization sweep


def _overparam_task(args):
    n, frac, s, seed, xi, opt = args
    basis = g0_basis(n)
    fields = random_fields(n, xi, stream(seed, "tfxy", n, s))
    h = tfxy_hamiltonian(n, fields)
    w, const = basis.weights(h)
    e0 = expectation_vector(StateSpec.zeros(n), basis)
    # whole layers only: the fewest layers holding at least frac * dim parameters
    layer = len(hva_tfxy_layer(n))
    layers = math.ceil(frac * basis.dim / layer - 1e-9)
    n_params = layers * layer
    # the ansatz conserves Z-parity, so the reachable minimum is the even-sector ground energy
    row = dict(n=n, fraction=frac, layers=layers, n_params=n_params, seed=s,
               e_min=tfxy_even_ground_energy(fields), scale=hs1_norm(h))  # fmt: skip
    if n_params == 0:
        return dict(row, energy=float(w @ e0 + const), iterations=0)
    circuit = hva_tfxy_circuit(n, n_params)
    theta0 = stream(seed, "init", n, frac, s).uniform(0, TWO_PI, n_params)
    _, trace = minimize(expectation_objective(circuit, e0, w, basis, const), theta0, opt)
    return dict(row, energy=float(min(trace)), iterations=len(trace) - 1)


def run_overparam_sweep(cfg: OverparamConfig) -> ExperimentResult:
    opt = cfg.optimizer.build()
    tasks = [(n, f, s, cfg.seed, cfg.xi, opt) for n in cfg.n_values for f in cfg.fractions for s in range(cfg.seeds)]
    rows = parallel_map(_overparam_task, tasks, cfg.threads)
    summary = {"convergence_probability": {}}
    for n in cfg.n_values:
        sub = [r for r in rows if r["n"] == n]
        for r in sub:
            r["eps"] = (r["energy"] - r["e_min"]) / r.pop("scale")
            r["converged"] = bool(r["n_params"] > 0 and r["eps"] < cfg.threshold)
        summary["convergence_probability"][n] = {
            f: float(np.mean([r["converged"] for r in sub if r["fraction"] == f])) for f in cfg.fractions
        }
    rows.sort(key=lambda r: (r["n"], r["fraction"], r["seed"]))
    return ExperimentResult("overparam", {"overparam": rows}, summary)


# ---------------------------------------------------------------------------
# LTFIM pre-training


def ltfim_frame_circuit(n: int, layers: int) -> tuple[FrameCircuit, dict]:
    """Per layer ``exp(-i a sum XX) exp(-i b sum Z) exp(-i phi sum X)``; params ``(phi, b, a)``."""
    lv = {"x": sum_z_levels(n), "z": sum_z_levels(n), "xx": zz_levels(n, [(j, j + 1) for j in range(1, n)])}
    lv["z"] = lv["z"].copy()  # distinct array: same values, different frame
    fc = FrameCircuit(n)
    for l in range(layers):
        fc.add(X_FRAME, lv["x"], 3 * l)
        fc.add(Z_FRAME, lv["z"], 3 * l + 1)
        fc.add(X_FRAME, lv["xx"], 3 * l + 2)
    return fc, lv


def ltfim_observable(fc: FrameCircuit, lv: dict, h_xx: float, h_z: float, h_x: float) -> FrameObservable:
    return FrameObservable(fc, [(X_FRAME, lv["xx"], h_xx), (Z_FRAME, lv["z"], h_z), (X_FRAME, lv["x"], h_x)])


def run_ltfim_pretrain(cfg: LtfimConfig) -> ExperimentResult:
    rows, var_rows = [], []
    sizes = sorted(set(cfg.n_values) | set(cfg.train_n))
    for n in sizes:
        layers = cfg.layers or n * (2 * n - 1)
        basis = g0_basis(n)
        e0 = expectation_vector(StateSpec.zeros(n), basis)
        stage1 = utfim_circuit(n, layers)
        w1, c1 = basis.weights(tfim_hamiltonian(n, cfg.h_xx, cfg.h_z))
        opt1 = cfg.stage1.build()
        pretrained = []
        for s in range(cfg.seeds):
            theta0 = stream(cfg.seed, "stage1", n, s).uniform(0, TWO_PI, stage1.n_params)
            theta, trace = minimize(expectation_objective(stage1, e0, w1, basis, c1), theta0, opt1)
            pretrained.append((theta, min(trace)))

        fc, lv = ltfim_frame_circuit(n, layers)
        psi0 = oracle.zero_state(n)
        for h_x in cfg.h_x_values:
            h = ltfim_hamiltonian(n, cfg.h_xx, cfg.h_z, h_x)
            e_min = oracle.exact_ground_state(h)[0]
            scale = hs1_norm(h)
            obs = ltfim_observable(fc, lv, cfg.h_xx, cfg.h_z, h_x)

            def fun(theta):
                v, g = value_and_grad(fc, obs, psi0, theta)
                return (v - e_min) / scale, g / scale

            starts = {"pretrained": [], "random": []}
            for s, (theta1, _) in enumerate(pretrained):
                init = np.zeros(fc.n_params)
                init[1::3], init[2::3] = theta1[0::2], theta1[1::2]
                starts["pretrained"].append(init)
                starts["random"].append(stream(cfg.seed, "random", n, h_x, s).uniform(0, TWO_PI, fc.n_params))
            for strategy, inits in starts.items():
                phi_grads = []
                for s, init in enumerate(inits):
                    eps0, g0 = fun(init)
                    phi_grads.append(g0[0::3])
                    row = dict(n=n, h_x=h_x, strategy=strategy, seed=s, eps_initial=eps0, eps_final=math.nan)
                    if n in cfg.train_n:
                        _, trace = minimize(fun, init, cfg.stage2.build())
                        row["eps_final"] = float(min(trace))
                        row["iterations"] = len(trace) - 1
                    rows.append(row)
                var_rows.append(
                    dict(n=n, h_x=h_x, strategy=strategy, grad_variance=float(np.var(np.concatenate(phi_grads))))
                )
    summary = {"median_eps_final": {}, "variance_decay_rate": {}}
    for h_x in cfg.h_x_values:
        for strategy in ("pretrained", "random"):
            key = f"{strategy}@h_x={h_x:g}"
            finals = [r["eps_final"] for r in rows if r["h_x"] == h_x and r["strategy"] == strategy]
            finals = [f for f in finals if not math.isnan(f)]
            if finals:
                summary["median_eps_final"][key] = float(np.median(finals))
            pts = [(r["n"], r["grad_variance"]) for r in var_rows if r["h_x"] == h_x and r["strategy"] == strategy]
            if len(pts) > 1:
                ns, vs = zip(*pts)
                # Var ~ exp(-rate * n)
                summary["variance_decay_rate"][key] = float(-np.polyfit(ns, np.log(vs), 1)[0])
    return ExperimentResult("ltfim", {"ltfim": rows, "gradient_variance": var_rows}, summary)


# ---------------------------------------------------------------------------
# QAOA pre-training


def qaoa_layers(n: int, divisor: int = 1) -> int:
    """``dim(g_TFIM) = n^2`` pre-training layers, divided for runtime control."""
    return max(1, (n * n) // divisor)


def pretrain_path_qaoa(n: int, layers: int, restarts: int, opt: OptimizerConfig, seed: int):
    """Stage 1 in the free-fermion picture; returns ``(gammas, betas, path energy)``."""
    basis = g0_basis(n)
    circuit = qaoa_path_circuit(n, layers)
    w, _ = basis.weights(chain_sum(n, "X", "X", coef=0.5))
    const = -(n - 1) / 2
    e0 = expectation_vector(StateSpec.zeros(n), basis)
    best = None
    for r in range(restarts):
        theta0 = stream(seed, "qaoa-stage1", n, r).uniform(0, TWO_PI, circuit.n_params)
        theta, trace = minimize(expectation_objective(circuit, e0, w, basis, const), theta0, opt)
        if best is None or min(trace) < best[1]:
            best = (theta, min(trace))
    return best[0][0::2], best[0][1::2], best[1]


def qaoa_frame_circuit(n: int, edges, layers: int):
    """Modified ansatz: per layer ``H_G`` (alpha), path cost (gamma), mixer (beta)."""
    g_lev = -cut_levels(n, edges)
    p_lev = -cut_levels(n, [(j, j + 1) for j in range(1, n)])
    x_lev = sum_z_levels(n)
    fc = FrameCircuit(n)
    for l in range(layers):
        fc.add(Z_FRAME, g_lev, 3 * l)
        fc.add(Z_FRAME, p_lev, 3 * l + 1)
        fc.add(X_FRAME, x_lev, 3 * l + 2)
    return fc, FrameObservable(fc, [(Z_FRAME, g_lev, 1.0)])


def _qaoa_task(args):
    gid, n, edges, gammas, betas, seed, opt = args
    layers = len(gammas)
    fc, obs = qaoa_frame_circuit(n, edges, layers)
    psi0 = np.full(1 << n, 2.0 ** (-n / 2), dtype=complex)
    e_gs = -float(max_cut_value(n, edges))

    def fun(theta):
        return value_and_grad(fc, obs, psi0, theta)

    pre = np.zeros(3 * layers)
    pre[1::3], pre[2::3] = gammas, betas
    inits = {"pretrained": pre, "random": stream(seed, "qaoa-random", gid).uniform(0, TWO_PI, 3 * layers)}
    out = []
    for strategy, init in inits.items():
        _, trace = minimize(fun, init, opt)
        out.append(
            dict(graph=gid, strategy=strategy, edges=len(edges), max_cut=-e_gs,
                 r_initial=trace[0] / e_gs, r=min(trace) / e_gs, iterations=len(trace) - 1)
        )  # fmt: skip
    return out


R_GW = 0.878


def run_qaoa_pretrain(cfg: QaoaConfig) -> ExperimentResult:
    n = cfg.n
    if cfg.graphs is not None:
        graphs = [check_simple_graph(n, g) for g in cfg.graphs]
    else:
        graphs = [random_graph(n, cfg.ensemble, int(stream(cfg.seed, "graph", g).integers(2**31)), cfg.edge_prob)
                  for g in range(cfg.count)]  # fmt: skip
    layers = qaoa_layers(n, cfg.layer_divisor)
    t0 = time.perf_counter()
    gammas, betas, path_energy = pretrain_path_qaoa(n, layers, cfg.stage1_restarts, cfg.stage1.build(), cfg.seed)
    stage1_wall = time.perf_counter() - t0
    opt = cfg.stage2.build()
    tasks = [(g, n, edges, gammas, betas, cfg.seed, opt) for g, edges in enumerate(graphs)]
    rows = [r for chunk in parallel_map(_qaoa_task, tasks, cfg.threads) for r in chunk]
    summary = dict(layers=layers, path_energy=path_energy, path_ground=-(n - 1), stage1_seconds=stage1_wall)
    for strategy in ("pretrained", "random"):
        rs = np.array([r["r"] for r in rows if r["strategy"] == strategy])
        summary[f"{strategy}_mean_r"] = float(rs.mean())
        summary[f"{strategy}_fraction_above_gw"] = float(np.mean(rs > R_GW))
    return ExperimentResult("qaoa", {"qaoa": rows}, summary)


# ---------------------------------------------------------------------------
# compilation


def dense_target(h: PauliSum, t: float) -> np.ndarray:
    return scipy.linalg.expm(-1j * t * h.to_matrix())


def _compile_task(args):
    n, t_final, locality, k, seed, opt, threshold, anneal_steps, check_hst = args
    basis = g0_basis(n)
    circuit = two_local_circuit(n, overparametrized_layers(n, 5 * n - 4))
    rng = stream(seed, "target", n, t_final, k)
    h = random_algebra_hamiltonian(basis, rng, locality)
    cfg = replace(opt, tol=threshold if opt.tol is None else opt.tol)
    if anneal_steps > 0 and t_final > 0:
        sched = AnnealSchedule.uniform(t_final, anneal_steps, cfg)
        res = anneal_compile(circuit, h, sched, basis, strict=False)
        theta, loss, iterations = res.theta, res.losses[-1], int(sum(res.iterations))
    else:
        v_bar = target_adjoint(h, t_final, basis)
        # a zero-time target is the identity, reached by the all-zero parameters
        theta0 = np.zeros(circuit.n_params) if t_final == 0 else rng.uniform(0, TWO_PI, circuit.n_params)
        theta, trace = minimize(compilation_objective(circuit, v_bar, basis), theta0, cfg)
        loss, iterations = min(trace), len(trace) - 1
    row = dict(n=n, t=t_final, locality=locality if locality is not None else "global", target=k,
               iterations=iterations, loss_g=float(loss), converged=bool(loss < threshold))  # fmt: skip
    if check_hst:
        if n <= 8:
            row["hst"] = oracle.hst_loss(circuit, theta, dense_target(h, t_final))
        else:
            row["hst"] = free_fermion_hst_loss(circuit, theta, h, t_final)
    return row


def position_moment(e: np.ndarray, E: np.ndarray, z_idx: np.ndarray) -> float:
    """``<N^2>`` for ``N = sum_j (j-1)(1 - Z_j)/2`` from one- and two-point Z data."""
    a = np.arange(len(z_idx), dtype=float)
    big_a = a.sum()
    z = e[z_idx]
    ezz = E[np.ix_(z_idx, z_idx)]
    return float((big_a**2 - 2 * big_a * (a @ z) + a @ ezz @ a) / 4)


def anderson_hamiltonian(n: int, xi: float, seed: int) -> PauliSum:
    h = tfxy_hamiltonian(n, random_fields(n, xi, stream(seed, "anderson", xi)))
    return h * (1.0 / hs1_norm(h))


def trotter_angles(circuit: Circuit, h: PauliSum, t: float, layers: int) -> np.ndarray:
    """First-order Trotter at the ansatz depth: each gate gets ``t c / L`` for its Hamiltonian term."""
    out = np.zeros(circuit.n_params)
    for g in circuit.gates:
        (_, p), = g.generator.terms()
        out[g.param] = t * h.coefficient(p) / layers
    return out


def _anderson_run(n: int, xi: float, cfg: CompileConfig) -> list[dict]:
    basis = g0_basis(n)
    h = anderson_hamiltonian(n, xi, cfg.seed)
    circuit = layered_circuit(n, hva_tfxy_layer(n), cfg.layers * (3 * n - 2))
    spec = StateSpec.computational("1" + "0" * (n - 1))
    e_in = expectation_vector(spec, basis)
    E_in = correlation_matrix(spec, basis)
    z_idx = np.array([basis.index_of(PauliString.single(n, "Z", j)) for j in range(1, n + 1)])

    def moment(u):
        return position_moment(u @ e_in, u @ E_in @ u.T, z_idx)

    times = np.round(np.arange(0.0, cfg.t_final + cfg.dt / 2, cfg.dt), 12)
    opt = cfg.anneal_optimizer.build()
    # the 2n-dimensional Majorana representation is much cheaper than the adjoint one
    fit_basis = majorana_basis(n) if cfg.anneal_basis == "majorana" else basis
    theta = np.zeros(circuit.n_params)
    rows = []
    for t in times:
        v_bar = target_adjoint(h, float(t), basis)
        fit_target = v_bar if fit_basis is basis else target_adjoint(h, float(t), fit_basis)
        theta, trace = minimize(compilation_objective(circuit, fit_target, fit_basis), theta, opt)
        u = adjoint_matrix(circuit, theta, basis)
        u_trot = adjoint_matrix(circuit, trotter_angles(circuit, h, float(t), cfg.layers), basis)
        exact, compiled, trotter = moment(v_bar), moment(u), moment(u_trot)
        rows.append(
            dict(xi=xi, t=float(t), n2_exact=exact, n2_compiled=compiled, n2_trotter=trotter,
                 err_compiled=abs(compiled - exact), err_trotter=abs(trotter - exact),
                 loss_g=float(min(trace)), iterations=len(trace) - 1,
                 hst=free_fermion_hst_loss(circuit, theta, h, float(t)))
        )  # fmt: skip
    return rows


def run_compile(cfg: CompileConfig) -> ExperimentResult:
    if cfg.mode == "anderson":
        rows = [r for xi in cfg.xi_values for r in _anderson_run(cfg.n, xi, cfg)]
        summary = {}
        for xi in cfg.xi_values:
            sub = [r for r in rows if r["xi"] == xi]
            early = max(math.sqrt(max(r["n2_compiled"], 0.0)) for r in sub if r["t"] <= 20)
            summary[f"xi={xi:g}"] = dict(
                max_err_compiled=max(r["err_compiled"] for r in sub),
                max_hst=max(r["hst"] for r in sub),
                final_err_trotter=sub[-1]["err_trotter"],
                final_err_compiled=sub[-1]["err_compiled"],
                max_rms_position=max(math.sqrt(max(r["n2_compiled"], 0.0)) for r in sub),
                early_rms_position=early,
            )
        return ExperimentResult("compile", {"anderson": rows}, summary)

    opt = cfg.optimizer.build()
    tasks = [
        (n, t, cfg.locality, k, cfg.seed, opt, cfg.threshold, cfg.anneal_steps, cfg.check_hst)
        for n in cfg.n_values for t in cfg.t_values for k in range(cfg.targets)
    ]  # fmt: skip
    rows = parallel_map(_compile_task, tasks, cfg.threads)
    summary = {"median_iterations": {}, "all_converged": all(r["converged"] for r in rows)}
    for n in cfg.n_values:
        for t in cfg.t_values:
            its = [r["iterations"] for r in rows if r["n"] == n and r["t"] == t]
            summary["median_iterations"][f"n={n},t={t:g}"] = float(np.median(its))
    return ExperimentResult("compile", {"random_target": rows}, summary)


# ---------------------------------------------------------------------------
# phase classifier


class DatasetError(ValueError):
    """Training labels contain a single class."""


def tfim_ground_vector(n: int, h_z: float, h_xx: float, layers: int, basis: LieBasis, opt, rng) -> np.ndarray:
    """Approximate TFIM ground state as an expectation vector, by VQE on the shared-angle ansatz."""
    circuit = utfim_circuit(n, layers)
    w, const = basis.weights(tfim_hamiltonian(n, h_xx, h_z))
    e0 = expectation_vector(StateSpec.zeros(n), basis)
    theta, _ = minimize(expectation_objective(circuit, e0, w, basis, const), rng.uniform(0, TWO_PI, circuit.n_params), opt)
    return evolve(e0, circuit, theta, basis)


@dataclass
class PhaseClassifier:
    circuit: Circuit
    basis: LieBasis
    theta: np.ndarray
    observable: np.ndarray

    def heisenberg_weights(self) -> np.ndarray:
        """``U^T w``: the observable pulled back to the input states."""
        w = self.observable.copy()
        self.circuit.program(self.basis).run(w, self.theta, inverse=True)
        return w

    def scores(self, states: np.ndarray, max_weight: int | None = None) -> np.ndarray:
        w = self.heisenberg_weights()
        if max_weight is not None:
            w = np.where(self.basis.weight_array() <= max_weight, w, 0.0)
        return states @ w


def mse_objective(circuit: Circuit, basis: LieBasis, states: np.ndarray, labels: np.ndarray, w: np.ndarray):
    """Mean squared error of ``w . U e_s`` against the labels, with one reverse sweep per call.

    The model output is linear in the input vector, so the loss gradient is
    the gradient of ``w . U e_bar`` with ``e_bar = sum_s c_s e_s`` and
    ``c_s = -2 (y_s - l_s) / N``.
    """
    prog = circuit.program(basis)

    def fun(theta):
        pulled = w.copy()
        prog.run(pulled, theta, inverse=True)
        scores = states @ pulled
        resid = labels - scores
        e_bar = (-2.0 / len(labels)) * (resid @ states)
        g = grad_expectation(circuit, theta, e_bar, w, basis)
        return float(np.mean(resid**2)), g.values

    return fun


def run_classifier(cfg: ClassifierConfig) -> ExperimentResult:
    n = cfg.n
    basis = g0_basis(n)
    total = cfg.train + cfg.test
    rng = stream(cfg.seed, "dataset")
    couplings = rng.uniform(0.0, 1.0, size=(total, 2))  # (h_z, h_xx)
    labels = np.where(couplings[:, 0] > couplings[:, 1], -1.0, 1.0)
    train, test = slice(0, cfg.train), slice(cfg.train, total)
    if len(set(labels[train])) < 2:
        raise DatasetError("training set contains a single phase; draw more samples or change the seed")

    vqe_layers = cfg.vqe_layers or max(1, n * n // 2)
    opt = cfg.vqe.build()
    states = np.array([
        tfim_ground_vector(n, hz, hxx, vqe_layers, basis, opt, stream(cfg.seed, "vqe", s))
        for s, (hz, hxx) in enumerate(couplings)
    ])  # fmt: skip
    if cfg.disguise_t:
        v_bar = target_adjoint(random_algebra_hamiltonian(basis, stream(cfg.seed, "disguise")), cfg.disguise_t, basis)
        states = states @ v_bar.T

    circuit = layered_circuit(n, hva_tfxy_layer(n), cfg.layers * (3 * n - 2))
    w = basis.unit(PauliString.single(n, "Z", 1))
    theta0 = stream(cfg.seed, "classifier-init").uniform(0, TWO_PI, circuit.n_params)
    theta, trace = minimize(mse_objective(circuit, basis, states[train], labels[train], w), theta0, cfg.training.build())
    model = PhaseClassifier(circuit, basis, theta, w)
    scores = model.scores(states)
    pred = np.where(scores >= 0, 1.0, -1.0)
    result = dict(
        n=n, disguise_t=cfg.disguise_t, final_loss=float(min(trace)), iterations=len(trace) - 1,
        train_accuracy=float(np.mean(pred[train] == labels[train])),
        test_accuracy=float(np.mean(pred[test] == labels[test])),
    )  # fmt: skip
    pruned = None
    if cfg.prune_k is not None:
        pruned = model.scores(states, cfg.prune_k)
        ppred = np.where(pruned >= 0, 1.0, -1.0)
        result["pruned_k"] = cfg.prune_k
        result["pruned_test_accuracy"] = float(np.mean(ppred[test] == labels[test]))
        result["pruned_train_accuracy"] = float(np.mean(ppred[train] == labels[train]))
    rows = []
    for s in range(total):
        row = dict(sample=s, split="train" if s < cfg.train else "test", h_z=float(couplings[s, 0]),
                   h_xx=float(couplings[s, 1]), label=int(labels[s]), score=float(scores[s]), predicted=int(pred[s]))  # fmt: skip
        if pruned is not None:
            row["score_pruned"] = float(pruned[s])
        rows.append(row)
    return ExperimentResult("classifier", {"samples": rows}, result)


RUNNERS = {
    "benchmark": run_benchmark,
    "magic": run_magic_demo,
    "overparam": run_overparam_sweep,
    "ltfim": run_ltfim_pretrain,
    "qaoa": run_qaoa_pretrain,
    "compile": run_compile,
    "classifier": run_classifier,
}


def run_experiment(cfg) -> ExperimentResult:
    return RUNNERS[cfg.experiment](cfg)
