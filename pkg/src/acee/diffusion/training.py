"""Two-stage training: joint source pretraining, then head-only target fine-tuning."""

import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from ..config.experiment import ArchitectureConfig, TrainConfig
from ..numerics.mlp import Mlp
from ..numerics.optim import adam_init, adam_step
from ..numerics.random import make_rng
from ..utils.error_handling import DimensionMismatch, ErrorContext, NumericFailure, TrainingDiverged, TrainingError
from .loss import dsm_loss
from .model import ScoreModel, build_score_model
from .schedule import Schedule

logger = logging.getLogger(__name__)

_SHUFFLE_STREAM = 0
_NOISE_STREAM = 1
_EVAL_STREAM = 2


@dataclass(frozen=True)
class TrainingResult:
    model: ScoreModel
    losses: Tuple[float, ...]
    initial_loss: float
    skipped_steps: int = 0

    @property
    def final_loss(self) -> float:
        return self.losses[-1] if self.losses else self.initial_loss


def _prepare(model: ScoreModel, y: np.ndarray, cond: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y, dtype=np.float64).ravel()
    cond = np.atleast_2d(np.asarray(cond, dtype=np.float64))
    if cond.shape != (y.shape[0], model.cond_dim):
        raise DimensionMismatch(
            "training conditioning does not match the model", cond=list(cond.shape), expected=model.cond_dim
        )
    if y.shape[0] == 0:
        raise TrainingError("no training rows")
    return model.y_std.transform(y), model.cond_std.transform(cond)


def evaluate_loss(model: ScoreModel, y: np.ndarray, cond: np.ndarray, seed: int = 0, draws: int = 1) -> float:
    """Loss on a fixed set of time and noise draws, for validation and divergence checks."""
    y_std, cond_std = _prepare(model, y, cond)
    return dsm_loss(model, y_std, cond_std, make_rng(seed, _EVAL_STREAM), time_draws=draws, grads=False).value


def _split(params: Sequence[np.ndarray], embed: Mlp, train_embed: bool) -> Tuple[Mlp, Mlp]:
    params = list(params)
    if not train_embed:
        return embed, Mlp.from_parameters(params)
    k = len(embed.parameters())
    return Mlp.from_parameters(params[:k]), Mlp.from_parameters(params[k:])


def _train(
    model: ScoreModel, y: np.ndarray, cond: np.ndarray, config: TrainConfig, train_embed: bool, stage: str
) -> TrainingResult:
    y_std, cond_std = _prepare(model, y, cond)
    initial = dsm_loss(
        model, y_std, cond_std, make_rng(config.seed, _EVAL_STREAM), config.time_draws, config.weighting, grads=False
    ).value
    if config.epochs == 0:
        return TrainingResult(model, (), initial)

    n = y_std.shape[0]
    batch = min(config.batch_size, n)
    shuffle_rng = make_rng(config.seed, _SHUFFLE_STREAM)
    noise_rng = make_rng(config.seed, _NOISE_STREAM)
    embed, head = model.embed, model.head
    params = (embed.parameters() if train_embed else []) + head.parameters()
    state = adam_init(params)
    losses: List[float] = []
    skipped = 0

    with ErrorContext(f"{stage} training", level=logging.INFO) as ctx:
        logger.info("%s training: %d rows, %d epochs, batch %d", stage, n, config.epochs, batch)
        for epoch in range(config.epochs):
            order = shuffle_rng.permutation(n)
            epoch_total = 0.0
            for b, start in enumerate(range(0, n, batch)):
                rows = order[start : start + batch]
                current = model.with_networks(embed, head)
                result = dsm_loss(
                    current,
                    y_std[rows],
                    cond_std[rows],
                    noise_rng,
                    config.time_draws,
                    config.weighting,
                    train_embed=train_embed,
                )
                if not np.isfinite(result.value):
                    raise NumericFailure(f"non-finite {stage} loss", epoch=epoch, batch=b)
                grads = (result.embed_grads or []) + (result.head_grads or [])
                update = adam_step(
                    state, params, grads, config.learning_rate, config.beta1, config.beta2, config.eps
                )
                skipped += 0 if update.applied else 1
                params, state = update.params, update.state
                embed, head = _split(params, embed, train_embed)
                epoch_total += result.value * rows.shape[0]
            epoch_loss = epoch_total / n
            losses.append(epoch_loss)
            if epoch_loss > config.divergence_factor * initial:
                raise TrainingDiverged(
                    f"{stage} loss diverged", epoch=epoch, loss=epoch_loss, initial=initial
                )
            if (epoch + 1) % 100 == 0:
                logger.debug("%s epoch %d loss %.5f", stage, epoch + 1, epoch_loss)
    logger.info("%s training finished in %.2fs, loss %.5f -> %.5f", stage, ctx.duration, initial, losses[-1])
    return TrainingResult(model.with_networks(embed, head), tuple(losses), initial, skipped)


def pretrain_source(model: ScoreModel, y: np.ndarray, cond: np.ndarray, config: TrainConfig) -> TrainingResult:
    """Train embedding and head jointly (the source stage, or plain training without transfer)."""
    return _train(model, y, cond, config, train_embed=True, stage="source")


def finetune_target(model: ScoreModel, y: np.ndarray, cond: np.ndarray, config: TrainConfig) -> TrainingResult:
    """Train the head only; the returned model shares ``model.embed`` unchanged."""
    result = _train(model, y, cond, config, train_embed=False, stage="target")
    if result.model.embed is not model.embed:
        raise TrainingError("embedding changed during fine-tuning")
    return result


def fit_score_model(
    y: np.ndarray,
    cond: np.ndarray,
    layout: Sequence[str],
    train: TrainConfig,
    architecture: ArchitectureConfig = ArchitectureConfig(),
    schedule: Schedule = Schedule(),
) -> TrainingResult:
    """Build a model standardized on ``(cond, y)`` and train it jointly."""
    model = build_score_model(cond, y, layout, architecture, schedule, seed=train.seed)
    return pretrain_source(model, y, cond, train)
