"""Versioned JSON checkpoints for score models.

Floats are written with ``repr`` precision, so a loaded model reproduces
sampling bit for bit on the same platform.
"""

import json
import logging
from pathlib import Path
from typing import List, Literal

import numpy as np
from pydantic import BaseModel, ValidationError

from ..numerics.mlp import Mlp
from ..utils.error_handling import AceeError, SchemaError
from .model import ScoreModel, Standardizer
from .schedule import Schedule

logger = logging.getLogger(__name__)


class LayerState(BaseModel):
    weight: List[List[float]]
    bias: List[float]


class ScheduleState(BaseModel):
    tau_min: float
    tau_max: float
    steps: int


class Checkpoint(BaseModel):
    format_version: Literal[1] = 1
    schedule: ScheduleState
    layout: List[str]
    embed: List[LayerState]
    head: List[LayerState]
    cond_mean: List[float]
    cond_scale: List[float]
    y_mean: float
    y_scale: float


def _layers(net: Mlp) -> List[LayerState]:
    return [LayerState(weight=w.tolist(), bias=b.tolist()) for w, b in zip(net.weights, net.biases)]


def _mlp(layers: List[LayerState]) -> Mlp:
    return Mlp(
        tuple(np.array(layer.weight, dtype=np.float64) for layer in layers),
        tuple(np.array(layer.bias, dtype=np.float64) for layer in layers),
    )


def to_checkpoint(model: ScoreModel) -> Checkpoint:
    return Checkpoint(
        schedule=ScheduleState(
            tau_min=model.schedule.tau_min, tau_max=model.schedule.tau_max, steps=model.schedule.steps
        ),
        layout=list(model.layout),
        embed=_layers(model.embed),
        head=_layers(model.head),
        cond_mean=model.cond_std.mean.tolist(),
        cond_scale=model.cond_std.scale.tolist(),
        y_mean=float(model.y_std.mean[0]),
        y_scale=float(model.y_std.scale[0]),
    )


def from_checkpoint(checkpoint: Checkpoint) -> ScoreModel:
    s = checkpoint.schedule
    return ScoreModel(
        embed=_mlp(checkpoint.embed),
        head=_mlp(checkpoint.head),
        schedule=Schedule(s.tau_min, s.tau_max, s.steps),
        layout=tuple(checkpoint.layout),
        cond_std=Standardizer(np.array(checkpoint.cond_mean), np.array(checkpoint.cond_scale)),
        y_std=Standardizer(np.array([checkpoint.y_mean]), np.array([checkpoint.y_scale])),
    )


def save_checkpoint(model: ScoreModel, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_checkpoint(model).model_dump()), encoding="utf-8")
    logger.info("Wrote checkpoint %s", path)
    return path


def load_checkpoint(path: Path) -> ScoreModel:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read checkpoint {path}: {exc}", path=str(path)) from exc
    try:
        checkpoint = Checkpoint.model_validate(raw)
    except ValidationError as exc:
        raise SchemaError(
            f"invalid checkpoint {path}",
            path=str(path),
            errors=[{"loc": list(e["loc"]), "msg": e["msg"]} for e in exc.errors()],
        ) from exc
    try:
        return from_checkpoint(checkpoint)
    except AceeError as exc:
        raise SchemaError(f"inconsistent checkpoint {path}: {exc.message}", path=str(path)) from exc
