"""Total effects between DAG nodes from synthetic interventional draws."""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ..numerics.random import make_rng
from ..proxy.factor import ResidualProxy
from ..utils.error_handling import DimensionMismatch, DomainError, ErrorContext, GraphError
from .generators import ConditionalGenerator

logger = logging.getLogger(__name__)

DagProxy = Union[ResidualProxy, np.ndarray, None]


@dataclass(frozen=True)
class DagEffectEstimate:
    tau_hat: float
    std_error: float
    contrasts: np.ndarray
    unit_ids: np.ndarray
    layout: Tuple[str, ...]
    k: str
    j: str
    x1: float
    x0: float


def dag_conditioning_layout(order: Sequence[str], k: str) -> Tuple[str, ...]:
    """``[X_{k^-}, X_k, S_{k^-}]`` for a causal order over observed nodes."""
    order = list(order)
    if k not in order:
        raise GraphError("treatment must be an observed column", k=k, order=order)
    upstream = order[: order.index(k)]
    return (*upstream, k, *(f"S_{c}" for c in upstream))


def _proxy_columns(proxy: DagProxy, columns: Sequence[str], upstream: List[str], n: int) -> np.ndarray:
    if proxy is None or not upstream:
        return np.empty((n, 0))
    if isinstance(proxy, ResidualProxy):
        return proxy.block(upstream)
    block = np.asarray(proxy, dtype=np.float64)
    if block.shape != (n, len(columns)):
        raise DimensionMismatch("proxy block must match the data matrix", shape=list(block.shape))
    return block[:, [list(columns).index(c) for c in upstream]]


def _check_query(columns: List[str], order: List[str], k: str, j: str) -> List[str]:
    missing = [c for c in order if c not in columns]
    if missing or sorted(order) != sorted(columns):
        raise GraphError("causal order must list every observed column once", missing=missing)
    if k not in order or j not in order:
        raise GraphError("treatment and target must be observed columns", k=k, j=j)
    if order.index(k) >= order.index(j):
        raise GraphError(f"{k} does not precede {j} in the causal order", k=k, j=j)
    return order[: order.index(k)]


def dag_training_data(
    X: np.ndarray,
    columns: Sequence[str],
    order: Sequence[str],
    k: str,
    j: str,
    proxy: DagProxy = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Observed ``([X_{k^-}, X_k, S_{k^-}], X_j)`` pairs for fitting the generator of ``X_j``."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    columns, order = list(columns), list(order)
    if X.shape[1] != len(columns):
        raise DimensionMismatch("column names do not match X width", columns=columns)
    upstream = _check_query(columns, order, k, j)
    S = _proxy_columns(proxy, columns, upstream, X.shape[0])
    cond = np.column_stack([X[:, [columns.index(c) for c in (*upstream, k)]], S])
    return cond, X[:, columns.index(j)]


def estimate_dag_total_effect(
    X: np.ndarray,
    columns: Sequence[str],
    order: Sequence[str],
    k: str,
    j: str,
    generator: ConditionalGenerator,
    x1: float = 1.0,
    x0: float = 0.0,
    proxy: DagProxy = None,
    M: int = 100,
    seed: int = 0,
    unit_ids: Optional[np.ndarray] = None,
) -> DagEffectEstimate:
    """Average over units of the mean synthetic ``X_j`` under ``X_k = x1`` minus under ``x0``.

    The generator is conditioned on ``[X_{k^-}, X_k, S_{k^-}]``. Both levels
    reuse the unit's stream ``(seed, unit_id)``, so ``x1 == x0`` gives
    exactly zero.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n = X.shape[0]
    columns = list(columns)
    order = list(order)
    if X.shape[1] != len(columns):
        raise DimensionMismatch("column names do not match X width", columns=columns)
    upstream = _check_query(columns, order, k, j)
    if M < 1:
        raise DomainError("M must be at least 1", M=M)
    ids = np.arange(n) if unit_ids is None else np.asarray(unit_ids).ravel()

    base = X[:, [columns.index(c) for c in upstream]]
    S = _proxy_columns(proxy, columns, upstream, n)

    def draws_at(level: float) -> np.ndarray:
        conds = np.column_stack([base, np.full(n, level), S])
        return generator.sample(conds, M, [make_rng(seed, int(u)) for u in ids])

    with ErrorContext(f"dag total effect {k}->{j}", level=logging.INFO):
        contrasts = draws_at(x1).mean(axis=1) - draws_at(x0).mean(axis=1)
    se = float(contrasts.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    tau = float(contrasts.mean())
    logger.info("Total effect %s->%s: %.5f (s.e. %.5f)", k, j, tau, se)
    return DagEffectEstimate(tau, se, contrasts, ids, dag_conditioning_layout(order, k), k, j, x1, x0)
