"""Training and experiment configuration models."""

import json
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..utils.error_handling import ConfigError
from .settings import Settings

Method = Literal["acee", "acee_bc", "diff_means", "reg_adjust", "acee_no_transfer"]

DAG_METHODS = ("acee", "reg_adjust", "acee_no_transfer")


class TrainConfig(BaseModel):
    """Optimizer and loss settings for one training stage."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    epochs: int = Field(default=2000, ge=0, description="Passes over the training rows")
    batch_size: int = Field(default=128, ge=1, description="Rows per gradient step")
    learning_rate: float = Field(default=1e-3, gt=0, description="Adam step size")
    beta1: float = Field(default=0.9, gt=0, lt=1)
    beta2: float = Field(default=0.999, gt=0, lt=1)
    eps: float = Field(default=1e-8, gt=0)
    time_draws: int = Field(default=1, ge=1, description="Diffusion times drawn per row and step")
    weighting: Literal["sigma2", "none"] = Field(
        default="sigma2", description="Loss weighting: sigma2 trains in noise-prediction form"
    )
    seed: int = Field(default=0, ge=0)
    divergence_factor: float = Field(default=1e3, gt=1, description="Abort when loss exceeds this multiple of the initial loss")


class ArchitectureConfig(BaseModel):
    """Widths of the conditioning embedding and the score head."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    embed_hidden: Tuple[int, ...] = (64, 64)
    embed_dim: int = Field(default=16, ge=1)
    head_hidden: Tuple[int, ...] = (128, 128, 128)

    @field_validator("embed_hidden", "head_hidden")
    @classmethod
    def _positive_widths(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if any(w < 1 for w in value):
            raise ValueError("layer widths must be positive")
        return value


class CsvSchema(BaseModel):
    """Column selection for a CSV-backed dataset."""

    model_config = ConfigDict(extra="forbid")

    path: Path
    treatment: str = "treatment"
    outcome: str = "outcome"
    covariates: Optional[List[str]] = None
    unit_id: Optional[str] = None


class DagQuery(BaseModel):
    model_config = ConfigDict(extra="forbid")

    treatment: Optional[str] = None
    outcome: Optional[str] = None
    x1: float = 1.0
    x0: float = 0.0


class ExperimentConfig(BaseModel):
    """A replicated estimation experiment read from JSON."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["ate", "dag"] = "ate"
    model: str = Field(default="M1", description="Benchmark model name, or 'csv' with a csv schema")
    csv: Optional[CsvSchema] = None
    v: Optional[List[List[float]]] = Field(default=None, description="Edge weights for model LinearV")

    n: Union[int, List[int]] = 200
    n_source: Union[int, List[int]] = 0
    source_shift: float = Field(default=0.0, description="Root-distribution shift of the source law")
    eta: Optional[float] = Field(default=None, ge=0, le=1, description="Share of source rows drawn from the target law")
    aux_model: str = "M3"

    q: int = Field(default=1, ge=1)
    include_x: bool = True
    include_d: bool = True
    include_y: bool = True

    M: int = Field(default=100, ge=1)
    N: Optional[int] = Field(default=None, ge=1, description="Neighbors per arm; None uses ceil(n**0.4)")
    include_self: bool = True

    architecture: ArchitectureConfig = ArchitectureConfig()
    train: TrainConfig = TrainConfig()
    finetune: Optional[TrainConfig] = None

    seeds: List[int] = Field(default_factory=lambda: list(range(10)))
    methods: List[Method] = Field(default_factory=lambda: ["acee", "acee_bc", "diff_means", "reg_adjust"])
    query: DagQuery = DagQuery()
    oracle_draws: int = Field(default=1_000_000, ge=1)
    output_dir: Optional[Path] = None

    @property
    def sizes(self) -> List[int]:
        return [self.n] if isinstance(self.n, int) else list(self.n)

    @property
    def source_sizes(self) -> List[int]:
        return [self.n_source] if isinstance(self.n_source, int) else list(self.n_source)

    def neighbors_for(self, n: int) -> int:
        return self.N if self.N is not None else math.ceil(n**0.4)

    def with_settings(self, settings: Settings) -> "ExperimentConfig":
        """Fill the draw counts a file left unset from process settings."""
        update: Dict[str, Any] = {}
        if "M" not in self.model_fields_set:
            update["M"] = settings.mc_draws
        if "oracle_draws" not in self.model_fields_set:
            update["oracle_draws"] = settings.oracle_draws
        return self.model_copy(update=update) if update else self

    @model_validator(mode="before")
    @classmethod
    def _dag_defaults(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("kind") == "dag" and "methods" not in data:
            return {**data, "methods": ["acee", "reg_adjust"]}
        return data

    @model_validator(mode="after")
    def _check(self) -> "ExperimentConfig":
        if not self.seeds:
            raise ValueError("seeds must be non-empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")
        if any(n < 10 for n in self.sizes):
            raise ValueError("n must be at least 10")
        if any(n < 0 for n in self.source_sizes):
            raise ValueError("n_source must be non-negative")
        if not self.methods:
            raise ValueError("methods must be non-empty")
        if self.model == "csv" and self.csv is None:
            raise ValueError("model 'csv' requires a csv schema")
        if self.kind == "dag" and self.model == "csv":
            raise ValueError("dag experiments need a simulated model for the do-oracle")
        if self.model == "csv" and max(self.source_sizes) > 0:
            raise ValueError("source pretraining needs a simulated model")
        if self.eta is not None and max(self.source_sizes) == 0:
            raise ValueError("eta requires n_source > 0")
        if "acee_no_transfer" in self.methods and max(self.source_sizes) == 0:
            raise ValueError("acee_no_transfer compares against source pretraining and needs n_source > 0")
        if self.kind == "dag":
            unsupported = [m for m in self.methods if m not in DAG_METHODS]
            if unsupported:
                raise ValueError(f"methods {unsupported} do not apply to dag experiments")
        if self.v is not None:
            if any(len(row) != len(self.v) for row in self.v):
                raise ValueError("v must be a square matrix")
        elif self.model.lower() == "linearv":
            raise ValueError("model LinearV needs a weight matrix v")
        return self


def load_experiment_config(path: Path) -> ExperimentConfig:
    """Read and validate an experiment JSON file."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read experiment config {path}: {exc}", path=str(path)) from exc
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(
            f"invalid experiment config {path}",
            path=str(path),
            errors=[{"loc": list(e["loc"]), "msg": e["msg"]} for e in exc.errors()],
        ) from exc
