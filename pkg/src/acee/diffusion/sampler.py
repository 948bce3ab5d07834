"""Reverse-SDE sampling from a trained score model."""

import logging
from typing import List, Sequence

import numpy as np

from ..numerics.random import Rng
from ..utils.error_handling import DimensionMismatch, NonFiniteDraws, retry_nonfinite
from .model import ScoreModel

logger = logging.getLogger(__name__)

# rows integrated together; chunking by unit leaves draws unchanged
_CHUNK_ROWS = 16_384


def _draw_noise(model: ScoreModel, m: int, rngs: Sequence[Rng]) -> List[np.ndarray]:
    """Per unit, the initial state and one noise row per stochastic step, shape ``(steps, m)``."""
    return [rng.standard_normal((model.schedule.steps, m)) for rng in rngs]


def _reverse_integrate(model: ScoreModel, h: np.ndarray, noise: np.ndarray) -> np.ndarray:
    """Euler-Maruyama from ``tau_max`` down to ``tau_min`` in standardized units.

    ``h`` is ``(rows, d_h)``; ``noise`` is ``(steps, rows)`` with the first
    row used as the initial state. The final step adds no noise.
    """
    schedule = model.schedule
    delta = schedule.step_size
    root = np.sqrt(delta)
    x = noise[0].copy()
    for k in range(schedule.steps):
        tau = np.full(x.shape[0], schedule.tau_max - k * delta)
        with np.errstate(over="ignore", invalid="ignore"):
            x = x + (0.5 * x + model.score(x, h, tau)) * delta
            if k + 1 < schedule.steps:
                x = x + root * noise[k + 1]
    return x


def _sample_chunk(model: ScoreModel, conds: np.ndarray, m: int, rngs: Sequence[Rng]) -> np.ndarray:
    b = conds.shape[0]
    h = np.repeat(model.embedding(model.cond_std.transform(conds)), m, axis=0)

    def attempt() -> np.ndarray:
        noise = np.concatenate(_draw_noise(model, m, rngs), axis=1)
        x = _reverse_integrate(model, h, noise)
        if not np.all(np.isfinite(x)):
            bad = np.flatnonzero(~np.isfinite(x.reshape(b, m)).all(axis=1))
            raise NonFiniteDraws("reverse integration left non-finite draws", units=bad.tolist())
        return x

    return model.y_std.inverse(retry_nonfinite(attempt)).reshape(b, m)


def sample_conditional_batch(model: ScoreModel, conds: np.ndarray, m: int, rngs: Sequence[Rng]) -> np.ndarray:
    """``m`` draws of ``Y | cond`` for every row of ``conds``, one random stream per row.

    Returns shape ``(rows, m)``. A unit's draws depend only on its own stream.
    """
    conds = np.atleast_2d(np.asarray(conds, dtype=np.float64))
    if conds.shape[1] != model.cond_dim:
        raise DimensionMismatch("conditioning width differs from the model", width=conds.shape[1], layout=list(model.layout))
    b = conds.shape[0]
    if len(rngs) != b:
        raise DimensionMismatch("need one random stream per conditioning row", rows=b, streams=len(rngs))
    if m == 0 or b == 0:
        return np.empty((b, m))
    per_chunk = max(1, _CHUNK_ROWS // m)
    parts = [
        _sample_chunk(model, conds[start : start + per_chunk], m, rngs[start : start + per_chunk])
        for start in range(0, b, per_chunk)
    ]
    return np.vstack(parts)


def sample_conditional(model: ScoreModel, cond: np.ndarray, m: int, rng: Rng) -> np.ndarray:
    return sample_conditional_batch(model, np.asarray(cond, dtype=np.float64).reshape(1, -1), m, [rng])[0]


class DiffusionGenerator:
    """Conditional generator backed by a trained score model."""

    def __init__(self, model: ScoreModel):
        self.model = model

    @property
    def layout(self) -> Sequence[str]:
        return self.model.layout

    def sample(self, conds: np.ndarray, m: int, rngs: Sequence[Rng]) -> np.ndarray:
        return sample_conditional_batch(self.model, conds, m, rngs)
