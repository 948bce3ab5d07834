"""Comparison estimators: difference in means and least-squares adjustment."""

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from ..effects.dataset import ObservationalDataset
from ..utils.error_handling import DimensionMismatch, DomainError, GraphError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BaselineEstimate:
    ate: float
    std_error: float

    def __float__(self) -> float:
        return self.ate


def baseline_diff_means(dataset: ObservationalDataset) -> BaselineEstimate:
    """``mean(Y | D=1) - mean(Y | D=0)`` with the unpooled standard error."""
    D, Y = dataset.require_treatment()
    treated, control = Y[D == 1], Y[D == 0]
    var = sum(arm.var(ddof=1) / arm.size for arm in (treated, control) if arm.size > 1)
    return BaselineEstimate(float(treated.mean() - control.mean()), float(math.sqrt(var)))


def _ols_coefficient(design: np.ndarray, y: np.ndarray, column: int) -> BaselineEstimate:
    n, k = design.shape
    rank = np.linalg.matrix_rank(design)
    if rank < k:
        logger.warning("Regression design is collinear (rank %d of %d columns), using the pseudo-inverse", rank, k)
    pinv = scipy.linalg.pinv(design)
    coef = pinv @ y
    resid = y - design @ coef
    sigma2 = float(resid @ resid) / max(n - rank, 1)
    se = math.sqrt(sigma2 * float(pinv[column] @ pinv[column]))
    return BaselineEstimate(float(coef[column]), se)


def baseline_reg_adjust(dataset: ObservationalDataset) -> BaselineEstimate:
    """Coefficient on ``D`` in the least-squares fit ``Y ~ [1, X, D]``."""
    D, Y = dataset.require_treatment()
    if dataset.n <= dataset.p + 2:
        raise DomainError("regression adjustment needs n > p + 2", n=dataset.n, p=dataset.p)
    design = np.column_stack([np.ones(dataset.n), dataset.X, D.astype(np.float64)])
    return _ols_coefficient(design, Y, design.shape[1] - 1)


def baseline_dag_regression(
    X: np.ndarray, columns: Sequence[str], order: Sequence[str], k: str, j: str
) -> BaselineEstimate:
    """Coefficient on ``X_k`` when ``X_j`` is regressed on ``X_k`` and every node before it."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    columns, order = list(columns), list(order)
    if X.shape[1] != len(columns):
        raise DimensionMismatch("column names do not match X width", columns=columns)
    for node in (k, j):
        if node not in order or node not in columns:
            raise GraphError(f"{node} is not an observed column", node=node)
    if order.index(k) >= order.index(j):
        raise GraphError(f"{k} does not precede {j} in the causal order", k=k, j=j)
    upstream = order[: order.index(k)]
    n = X.shape[0]
    if n <= len(upstream) + 2:
        raise DomainError("regression adjustment needs more rows than regressors", n=n)
    design = np.column_stack([np.ones(n), X[:, [columns.index(c) for c in (*upstream, k)]]])
    return _ols_coefficient(design, X[:, columns.index(j)], design.shape[1] - 1)
