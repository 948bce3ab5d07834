"""Conditional score network: a conditioning embedding plus a noise-prediction head."""

import logging
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..config.experiment import ArchitectureConfig
from ..numerics.mlp import Mlp, init_mlp, mlp_forward
from ..numerics.random import make_rng
from ..utils.error_handling import DimensionMismatch
from .schedule import Schedule

logger = logging.getLogger(__name__)

TIME_FEATURES = 2


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, data: np.ndarray) -> "Standardizer":
        arr = np.asarray(data, dtype=np.float64)
        arr = arr[:, None] if arr.ndim == 1 else arr
        scale = arr.std(axis=0)
        # constant columns pass through centered
        scale = np.where(scale > 0, scale, 1.0)
        return cls(arr.mean(axis=0), scale)

    @classmethod
    def identity(cls, width: int) -> "Standardizer":
        return cls(np.zeros(width), np.ones(width))

    def transform(self, data: np.ndarray) -> np.ndarray:
        return (np.asarray(data, dtype=np.float64) - self.mean) / self.scale

    def inverse(self, data: np.ndarray) -> np.ndarray:
        return np.asarray(data, dtype=np.float64) * self.scale + self.mean


@dataclass(frozen=True)
class ScoreModel:
    """``h = embed(cond)``; ``head([z, h, tau, exp(-tau/2)])`` predicts the noise.

    Both conditioning and outcome are handled in standardized units; the
    score of the standardized outcome is ``-eps_hat / sigma(tau)``.
    """

    embed: Mlp
    head: Mlp
    schedule: Schedule
    layout: Tuple[str, ...]
    cond_std: Standardizer
    y_std: Standardizer

    def __post_init__(self) -> None:
        d_h = self.embed.dims[-1]
        if self.head.dims[0] != 1 + d_h + TIME_FEATURES or self.head.dims[-1] != 1:
            raise DimensionMismatch("head input must be [z, h, tau, alpha] with scalar output", head=list(self.head.dims))
        if len(self.layout) != self.cond_dim:
            raise DimensionMismatch("conditioning layout does not match the embedding input", layout=list(self.layout))

    @property
    def cond_dim(self) -> int:
        return self.embed.dims[0]

    @property
    def embed_dim(self) -> int:
        return self.embed.dims[-1]

    def embedding(self, cond_std: np.ndarray) -> np.ndarray:
        return mlp_forward(self.embed, np.atleast_2d(cond_std))

    def head_inputs(self, z: np.ndarray, h: np.ndarray, tau: np.ndarray) -> np.ndarray:
        tau = np.broadcast_to(np.asarray(tau, dtype=np.float64), z.shape)
        return np.column_stack([z, h, tau, self.schedule.alpha(tau)])

    def predict_noise(self, z: np.ndarray, h: np.ndarray, tau: np.ndarray) -> np.ndarray:
        return mlp_forward(self.head, self.head_inputs(z, h, tau))[:, 0]

    def score(self, z: np.ndarray, h: np.ndarray, tau: np.ndarray) -> np.ndarray:
        return -self.predict_noise(z, h, tau) / self.schedule.sigma(tau)

    def with_networks(self, embed: Optional[Mlp] = None, head: Optional[Mlp] = None) -> "ScoreModel":
        return replace(self, embed=embed or self.embed, head=head or self.head)

    def parameters(self) -> List[np.ndarray]:
        return self.embed.parameters() + self.head.parameters()


def build_score_model(
    cond: np.ndarray,
    y: np.ndarray,
    layout: Sequence[str],
    architecture: ArchitectureConfig = ArchitectureConfig(),
    schedule: Schedule = Schedule(),
    seed: int = 0,
) -> ScoreModel:
    """Freshly initialized model whose standardization comes from ``(cond, y)``."""
    cond = np.atleast_2d(np.asarray(cond, dtype=np.float64))
    if cond.shape[1] != len(layout):
        raise DimensionMismatch("conditioning width differs from layout", width=cond.shape[1], layout=list(layout))
    embed_dims = [cond.shape[1], *architecture.embed_hidden, architecture.embed_dim]
    head_dims = [1 + architecture.embed_dim + TIME_FEATURES, *architecture.head_hidden, 1]
    embed = init_mlp(embed_dims, make_rng(seed, 0))
    head = init_mlp(head_dims, make_rng(seed, 1))
    logger.debug("Score model embed %s head %s (%d parameters)", embed_dims, head_dims, embed.n_params + head.n_params)
    y_std = Standardizer.fit(np.asarray(y, dtype=np.float64).ravel())
    return ScoreModel(embed, head, schedule, tuple(layout), Standardizer.fit(cond), y_std)
