"""Gradient-based optimizers and the annealed compilation driver."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize

from .circuits import Circuit, target_adjoint
from .gradients import grad_compilation
from .lie import LieBasis
from .pauli import PauliSum

LossGrad = Callable[[np.ndarray], tuple[float, np.ndarray]]


class OptimizationError(RuntimeError):
    """Loss became non-finite during optimization."""


@dataclass
class OptimizerConfig:
    method: str = "adam"
    lr: float = 0.05
    max_iter: int = 1000
    tol: float | None = None  # stop once the loss is at or below this value
    grad_tol: float = 0.0  # stop once the gradient norm is at or below this value
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    # multiply lr by ``decay`` after ``patience`` iterations without a new best loss
    decay: float = 1.0
    patience: int = 50
    min_lr: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        if self.method not in ("adam", "gradient_descent", "lbfgs"):
            raise ValueError(f"unknown optimizer {self.method!r}")
        if self.lr <= 0:
            raise ValueError("learning rate must be positive")
        if self.max_iter < 0:
            raise ValueError("iteration cap must be non-negative")


def minimize(fun: LossGrad, theta0, config: OptimizerConfig | None = None) -> tuple[np.ndarray, list[float]]:
    """Run the optimizer; returns the best parameters seen and the loss trace.

    ``trace[k]`` is the loss at iteration ``k`` (``trace[0]`` is the start), so
    the number of update steps taken is ``len(trace) - 1``.
    """
    cfg = config or OptimizerConfig()
    theta = np.array(theta0, dtype=float, copy=True)
    if cfg.method == "lbfgs":
        return _minimize_lbfgs(fun, theta, cfg)
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    lr = cfg.lr
    best_loss, best_theta = math.inf, theta.copy()
    since_best = 0
    trace: list[float] = []
    for it in range(cfg.max_iter + 1):
        loss, grad = fun(theta)
        loss = float(loss)
        if not math.isfinite(loss) or not np.all(np.isfinite(grad)):
            raise OptimizationError(f"non-finite loss or gradient at iteration {it} (loss={loss!r})")
        trace.append(loss)
        if loss < best_loss:
            best_loss, best_theta = loss, theta.copy()
            since_best = 0
        else:
            since_best += 1
            if since_best >= cfg.patience and cfg.decay < 1.0:
                lr = max(cfg.min_lr, lr * cfg.decay)
                since_best = 0
        if cfg.tol is not None and loss <= cfg.tol:
            break
        if np.linalg.norm(grad) <= cfg.grad_tol:
            break
        if it == cfg.max_iter:
            break
        if cfg.method == "adam":
            t = it + 1
            m = cfg.beta1 * m + (1 - cfg.beta1) * grad
            v = cfg.beta2 * v + (1 - cfg.beta2) * grad * grad
            mhat = m / (1 - cfg.beta1**t)
            vhat = v / (1 - cfg.beta2**t)
            theta = theta - lr * mhat / (np.sqrt(vhat) + cfg.eps)
        else:
            theta = theta - lr * grad
    return best_theta, trace


def _minimize_lbfgs(fun: LossGrad, theta: np.ndarray, cfg: OptimizerConfig) -> tuple[np.ndarray, list[float]]:
    """Quasi-Newton path (scipy's L-BFGS-B); the trace records the loss after every accepted step."""

    def checked(x):
        loss, grad = fun(x)
        loss = float(loss)
        if not math.isfinite(loss) or not np.all(np.isfinite(grad)):
            raise OptimizationError(f"non-finite loss or gradient (loss={loss!r})")
        return loss, np.asarray(grad, dtype=float)

    loss0, grad0 = checked(theta)
    trace = [loss0]
    if (cfg.tol is not None and loss0 <= cfg.tol) or np.linalg.norm(grad0) <= cfg.grad_tol or cfg.max_iter == 0:
        return theta, trace

    best = [loss0, theta.copy()]

    def callback(intermediate_result):
        trace.append(float(intermediate_result.fun))
        if trace[-1] < best[0]:
            best[0], best[1] = trace[-1], np.array(intermediate_result.x, copy=True)
        if cfg.tol is not None and trace[-1] <= cfg.tol:
            raise StopIteration

    options = dict(maxiter=cfg.max_iter, gtol=max(cfg.grad_tol, 1e-14), ftol=1e-15, maxcor=20)
    res = optimize.minimize(checked, theta, jac=True, method="L-BFGS-B", callback=callback, options=options)
    if res.fun < best[0]:
        best = [float(res.fun), np.array(res.x, copy=True)]
    return best[1], trace


def best_so_far(trace: list[float]) -> np.ndarray:
    return np.minimum.accumulate(np.asarray(trace))


@dataclass
class AnnealSchedule:
    times: list[float]
    config: OptimizerConfig = field(default_factory=OptimizerConfig)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if len(t) == 0 or t[0] != 0.0:
            raise ValueError("anneal schedule must start at t = 0")
        if np.any(np.diff(t) <= 0):
            raise ValueError("anneal times must be strictly increasing")

    @classmethod
    def uniform(cls, t_final: float, steps: int | None = None, config: OptimizerConfig | None = None):
        """``steps`` equal increments up to ``t_final`` (default ``ceil(t_final / 0.5)``)."""
        steps = max(1, math.ceil(t_final / 0.5)) if steps is None else steps
        times = [0.0] if t_final == 0 else list(np.linspace(0.0, t_final, steps + 1))
        return cls(times, config or OptimizerConfig())


class AnnealError(RuntimeError):
    def __init__(self, message: str, thetas: list[np.ndarray], losses: list[float]):
        super().__init__(message)
        self.thetas = thetas
        self.losses = losses


@dataclass
class AnnealResult:
    theta: np.ndarray
    losses: list[float]  # final compilation loss per schedule time
    thetas: list[np.ndarray]  # solution per schedule time
    start_losses: list[float]  # loss of the warm start against each new target
    iterations: list[int]


def compilation_objective(circuit: Circuit, v_bar: np.ndarray, basis: LieBasis) -> LossGrad:
    def fun(theta):
        r = grad_compilation(circuit, theta, v_bar, basis)
        return r.loss, r.values

    return fun


def anneal_compile(
    circuit: Circuit, h: PauliSum, schedule: AnnealSchedule, basis: LieBasis, theta0=None, strict: bool = True
) -> AnnealResult:
    """Compile ``exp(-i t H)`` at each schedule time, warm-starting from the previous solution."""
    theta = np.zeros(circuit.n_params) if theta0 is None else np.array(theta0, dtype=float)
    thetas, losses, starts, iters = [], [], [], []
    cfg = schedule.config
    for t in schedule.times:
        v_bar = target_adjoint(h, t, basis)
        fun = compilation_objective(circuit, v_bar, basis)
        theta, trace = minimize(fun, theta, cfg)
        starts.append(trace[0])
        best = min(trace)
        thetas.append(theta.copy())
        losses.append(best)
        iters.append(len(trace) - 1)
        if strict and cfg.tol is not None and best > cfg.tol:
            raise AnnealError(f"step t={t:g} stopped at loss {best:.3e} > {cfg.tol:.1e}", thetas, losses)
    return AnnealResult(theta, losses, thetas, starts, iters)
