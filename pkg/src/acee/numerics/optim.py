"""Adaptive-moment (Adam) optimizer over lists of arrays."""

import logging
from dataclasses import dataclass
from typing import List, NamedTuple, Sequence

import numpy as np

from ..utils.error_handling import DimensionMismatch, DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AdamState:
    m: Sequence[np.ndarray]
    v: Sequence[np.ndarray]
    t: int = 0


class AdamUpdate(NamedTuple):
    params: List[np.ndarray]
    state: AdamState
    applied: bool


def adam_init(params: Sequence[np.ndarray]) -> AdamState:
    return AdamState(
        m=tuple(np.zeros_like(p, dtype=np.float64) for p in params),
        v=tuple(np.zeros_like(p, dtype=np.float64) for p in params),
        t=0,
    )


def adam_step(
    state: AdamState,
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> AdamUpdate:
    """One bias-corrected Adam update.

    A step whose gradients contain NaN or infinity is skipped: parameters and
    moments are returned unchanged with ``applied=False``.
    """
    if lr <= 0:
        raise DomainError("learning rate must be positive", lr=lr)
    if not (len(params) == len(grads) == len(state.m) == len(state.v)):
        raise DimensionMismatch("params, grads and optimizer state differ in length")
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise DimensionMismatch("gradient shape differs from parameter", param=list(p.shape), grad=list(g.shape))

    if not all(np.all(np.isfinite(g)) for g in grads):
        logger.warning("Skipping optimizer step %d: non-finite gradient", state.t + 1)
        return AdamUpdate(list(params), state, False)

    t = state.t + 1
    new_m = [beta1 * m + (1.0 - beta1) * g for m, g in zip(state.m, grads)]
    new_v = [beta2 * v + (1.0 - beta2) * g * g for v, g in zip(state.v, grads)]
    c1 = 1.0 - beta1**t
    c2 = 1.0 - beta2**t
    new_params = [p - lr * (m / c1) / (np.sqrt(v / c2) + eps) for p, m, v in zip(params, new_m, new_v)]
    return AdamUpdate(new_params, AdamState(tuple(new_m), tuple(new_v), t), True)
