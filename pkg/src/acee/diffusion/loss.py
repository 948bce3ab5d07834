"""Denoising score-matching loss with exact gradients."""

from dataclasses import dataclass
from typing import List, Literal, Optional

import numpy as np

from ..numerics.mlp import backward_from_cache, forward_with_cache
from ..numerics.random import Rng
from ..utils.error_handling import DimensionMismatch, DomainError
from .model import ScoreModel
from .schedule import Schedule

Weighting = Literal["sigma2", "none"]


@dataclass(frozen=True)
class LossResult:
    value: float
    embed_grads: Optional[List[np.ndarray]]
    head_grads: Optional[List[np.ndarray]]
    tau: np.ndarray
    eps: np.ndarray


def _weights(tau: np.ndarray, weighting: Weighting, schedule: Schedule) -> np.ndarray:
    if weighting == "sigma2":
        return np.ones_like(tau)
    if weighting == "none":
        return 1.0 / schedule.sigma2(tau)
    raise DomainError(f"unknown loss weighting {weighting!r}")


def denoising_loss_value(
    eps_hat: np.ndarray, eps: np.ndarray, tau: np.ndarray, weighting: Weighting, schedule: Schedule
) -> float:
    """Mean of ``w(tau) (eps_hat - eps)^2``.

    ``sigma2`` weighting is the noise-prediction form; ``none`` equals the
    unweighted squared score error ``(-eps_hat/sigma + eps/sigma)^2``.
    """
    diff = np.asarray(eps_hat, dtype=np.float64) - np.asarray(eps, dtype=np.float64)
    return float(np.mean(_weights(np.asarray(tau, dtype=np.float64), weighting, schedule) * diff * diff))


def dsm_loss(
    model: ScoreModel,
    y_std: np.ndarray,
    cond_std: np.ndarray,
    rng: Rng,
    time_draws: int = 1,
    weighting: Weighting = "sigma2",
    train_embed: bool = True,
    grads: bool = True,
) -> LossResult:
    """Monte Carlo loss over ``time_draws`` uniform times per row, on standardized data."""
    y = np.asarray(y_std, dtype=np.float64).ravel()
    cond = np.atleast_2d(np.asarray(cond_std, dtype=np.float64))
    b = y.shape[0]
    if cond.shape != (b, model.cond_dim):
        raise DimensionMismatch("conditioning batch does not match outcomes", cond=list(cond.shape), rows=b)
    if time_draws < 1:
        raise DomainError("time_draws must be at least 1", time_draws=time_draws)

    h, embed_cache = forward_with_cache(model.embed, cond)
    rows = b * time_draws
    y_rep = np.repeat(y, time_draws)
    h_rep = np.repeat(h, time_draws, axis=0)
    tau = model.schedule.sample_times(rng, rows)
    eps = rng.standard_normal(rows)
    z = model.schedule.alpha(tau) * y_rep + model.schedule.sigma(tau) * eps

    out, head_cache = forward_with_cache(model.head, model.head_inputs(z, h_rep, tau))
    eps_hat = out[:, 0]
    w = _weights(tau, weighting, model.schedule)
    diff = eps_hat - eps
    value = float(np.mean(w * diff * diff))
    if not grads:
        return LossResult(value, None, None, tau, eps)

    g_out = (2.0 / rows) * w * diff
    head_grad = backward_from_cache(model.head, head_cache, g_out[:, None])
    embed_grads: Optional[List[np.ndarray]] = None
    if train_embed:
        d_h = model.embed_dim
        g_h = head_grad.inputs[:, 1 : 1 + d_h].reshape(b, time_draws, d_h).sum(axis=1)
        embed_grads = backward_from_cache(model.embed, embed_cache, g_h).parameters()
    return LossResult(value, embed_grads, head_grad.parameters(), tau, eps)
