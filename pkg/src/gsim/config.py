"""Experiment configuration files (JSON, schema ``gsim-experiment/1``)."""

from __future__ import annotations

import hashlib
import json
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, field_validator, model_validator

SCHEMA = "gsim-experiment/1"


class OptimizerSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    method: Literal["adam", "gradient_descent", "lbfgs"] = "adam"
    lr: float = Field(0.05, gt=0)
    max_iter: int = Field(1000, ge=0)
    tol: Optional[float] = None
    decay: float = Field(1.0, gt=0, le=1)
    patience: int = Field(50, ge=1)

    def build(self, seed: int | None = None):
        from .optimize import OptimizerConfig

        return OptimizerConfig(
            method=self.method, lr=self.lr, max_iter=self.max_iter, tol=self.tol,
            decay=self.decay, patience=self.patience, seed=seed,
        )  # fmt: skip


class _Base(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    schema_id: Literal["gsim-experiment/1"] = Field(SCHEMA, alias="schema")
    seed: int = 0
    threads: int = Field(1, ge=1)
    out: Optional[str] = None


class BenchmarkConfig(_Base):
    experiment: Literal["benchmark"] = "benchmark"
    n_values: list[int] = [4]
    repeats: int = Field(20, ge=1)
    batches: int = Field(5, ge=1)

    @field_validator("n_values")
    @classmethod
    def _sizes(cls, v):
        if not v or min(v) < 2:
            raise ValueError("n_values must be non-empty with n >= 2")
        return v


class MagicConfig(_Base):
    experiment: Literal["magic"] = "magic"
    n: int = 200
    tau: float = 2.81
    xi: float = Field(1.0, ge=0)
    steps: int = Field(300, ge=0)
    dt: float = 2.0
    noise_p: float = Field(3e-4, ge=0, le=1)
    noisy: bool = True

    @field_validator("n")
    @classmethod
    def _blocks(cls, v):
        if v < 4 or v % 4:
            raise ValueError("the magic state needs n divisible by 4")
        return v


class OverparamConfig(_Base):
    experiment: Literal["overparam"] = "overparam"
    n_values: list[int] = [8]
    fractions: list[float] = [0.0, 0.1, 0.2, 0.3, 0.5, 1.0]
    seeds: int = Field(20, ge=1)
    xi: float = Field(0.1, ge=0)
    threshold: float = 1e-4
    optimizer: OptimizerSettings = OptimizerSettings(method="lbfgs", max_iter=2000)

    @field_validator("fractions")
    @classmethod
    def _fractions(cls, v):
        if any(f < 0 for f in v):
            raise ValueError("parameter fractions must be non-negative")
        return v


class LtfimConfig(_Base):
    experiment: Literal["ltfim"] = "ltfim"
    n_values: list[int] = [6, 8, 10, 12]
    train_n: list[int] = [12]
    h_x_values: list[float] = [-1.0]
    h_z: float = -1.0
    h_xx: float = 1.0
    seeds: int = Field(5, ge=1)
    layers: Optional[int] = None  # default dim(g0) = n(2n - 1)
    stage1: OptimizerSettings = OptimizerSettings(method="lbfgs", max_iter=1000)
    stage2: OptimizerSettings = OptimizerSettings(method="lbfgs", max_iter=300)

    @model_validator(mode="after")
    def _caps(self):
        if max(self.n_values + self.train_n) > 12:
            raise ValueError("LTFIM stage 2 is dense: n <= 12")
        return self


class QaoaConfig(_Base):
    experiment: Literal["qaoa"] = "qaoa"
    n: int = 16
    ensemble: Literal["regular3", "erdos_renyi"] = "regular3"
    edge_prob: float = Field(0.3, gt=0, le=1)
    count: int = Field(50, ge=1)
    layer_divisor: int = Field(1, ge=1)
    stage1_restarts: int = Field(3, ge=1)
    stage1: OptimizerSettings = OptimizerSettings(method="lbfgs", max_iter=1000)
    stage2: OptimizerSettings = OptimizerSettings(method="lbfgs", max_iter=150)
    graphs: Optional[list[list[tuple[int, int]]]] = None  # explicit edge lists override the ensemble

    @field_validator("n")
    @classmethod
    def _cap(cls, v):
        if not 2 <= v <= 16:
            raise ValueError("QAOA stage 2 is dense: 2 <= n <= 16")
        return v


class CompileConfig(_Base):
    experiment: Literal["compile"] = "compile"
    mode: Literal["random_target", "anderson"] = "random_target"
    # random_target mode
    n_values: list[int] = [8]
    locality: Optional[int] = 2  # None means global targets
    t_values: list[float] = [10.0]
    targets: int = Field(10, ge=1)
    threshold: float = 1e-3
    anneal_steps: int = Field(0, ge=0)  # 0: direct random-init optimization
    optimizer: OptimizerSettings = OptimizerSettings(method="lbfgs", max_iter=3000)
    check_hst: bool = False
    # anderson mode
    n: int = 12
    xi_values: list[float] = [0.0, 4.0]
    t_final: float = 100.0
    dt: float = 0.5
    layers: int = 17
    anneal_optimizer: OptimizerSettings = OptimizerSettings(method="lbfgs", max_iter=2000, tol=1e-15)
    # representation the anneal optimizes in; both have the same zero-loss set
    anneal_basis: Literal["majorana", "adjoint"] = "majorana"

    @model_validator(mode="after")
    def _caps(self):
        if self.mode == "random_target" and max(self.n_values) > 50:
            raise ValueError("random-target compilation limited to n <= 50")
        if self.mode == "anderson" and self.n > 12:
            raise ValueError("anderson mode limited to n <= 12")
        return self


class ClassifierConfig(_Base):
    experiment: Literal["classifier"] = "classifier"
    n: int = 20
    train: int = Field(100, ge=2)
    test: int = Field(100, ge=1)
    disguise_t: float = 10.0
    layers: int = 21
    prune_k: Optional[int] = 2
    vqe_layers: Optional[int] = None  # default n^2 / 2
    vqe: OptimizerSettings = OptimizerSettings(method="lbfgs", max_iter=300)
    training: OptimizerSettings = OptimizerSettings(method="lbfgs", max_iter=500)


ExperimentConfig = Annotated[
    Union[BenchmarkConfig, MagicConfig, OverparamConfig, LtfimConfig, QaoaConfig, CompileConfig, ClassifierConfig],
    Field(discriminator="experiment"),
]
_ADAPTER = TypeAdapter(ExperimentConfig)
EXPERIMENTS = ("benchmark", "magic", "overparam", "ltfim", "qaoa", "compile", "classifier")


def parse_config(data: dict | str, experiment: str | None = None):
    """Validate a config dict or JSON text; ``experiment`` fills in a missing name."""
    if isinstance(data, str):
        data = json.loads(data)
    data = dict(data)
    if experiment is not None:
        if data.setdefault("experiment", experiment) != experiment:
            raise ValueError(f"config is for {data['experiment']!r}, not {experiment!r}")
    return _ADAPTER.validate_python(data)


def render_config(cfg) -> str:
    return json.dumps(cfg.model_dump(mode="json", by_alias=True), indent=2, sort_keys=True)


def config_hash(cfg) -> str:
    text = json.dumps(cfg.model_dump(mode="json", by_alias=True), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]
