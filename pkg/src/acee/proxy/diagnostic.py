"""Permutation check that the outcome residual carries no leftover confounding."""

import logging
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np
from scipy import linalg

from ..effects.dataset import ObservationalDataset
from ..numerics.random import Rng
from ..utils.error_handling import DimensionMismatch, DomainError, EstimationError
from .factor import FactorProxy, fit_factor_proxy

logger = logging.getLogger(__name__)

_VANISHING = 1e-8


@dataclass(frozen=True)
class DiagnosticResult:
    statistic: float
    p_value: float
    permutations: int
    terms: Tuple[str, ...] = ()

    def rejects(self, level: float = 0.05) -> bool:
        return self.p_value <= level


def _outcome_free(dataset: ObservationalDataset, proxy: FactorProxy) -> FactorProxy:
    if not proxy.has_outcome:
        return proxy
    include_x = any(c in proxy.columns for c in dataset.columns)
    include_d = "D" in proxy.columns
    width = len(proxy.minus_y_columns)
    if width == 0:
        raise EstimationError("proxy was fit on the outcome alone; nothing remains to adjust for")
    return fit_factor_proxy(
        dataset, min(proxy.q, width), include_x, include_d, include_y=False, standardize=proxy.standardized
    )


def _residualizer(dataset: ObservationalDataset, s_minus_y: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    n = dataset.n
    base = [np.ones(n), dataset.X]
    if dataset.D is not None:
        base.append(dataset.D.astype(np.float64))
    covariates = np.column_stack(base)
    rank = np.linalg.matrix_rank(covariates)
    if rank < covariates.shape[1]:
        logger.warning(
            "Diagnostic adjustment is collinear (rank %d of %d columns), projecting with a pseudo-inverse basis",
            rank,
            covariates.shape[1],
        )
    # proxy columns are affine in the included data columns, orth() drops what is already spanned
    basis = linalg.orth(np.column_stack([covariates, s_minus_y]))
    return lambda v: v - basis @ (basis.T @ v)


def proxy_sufficiency_diagnostic(
    dataset: ObservationalDataset,
    proxy: FactorProxy,
    rng: Rng,
    permutations: int = 199,
) -> DiagnosticResult:
    """Partial-correlation permutation test of ``Y - S_Y`` against functions of ``S_Y``.

    The outcome proxy is re-estimated without ``Y`` in the factor fit (a fit
    that includes ``Y`` reproduces it in ``S_Y`` and correlates with its own
    residual), as the projection of ``Y`` on ``[1, Phi_{-Y}]``. Both the
    residual and the test terms ``S_Y`` and centered ``S_Y**2`` are adjusted
    linearly for ``[1, X, D, S_{-Y}]``; terms that vanish after adjustment are
    skipped. The statistic is the largest absolute partial correlation, and
    the p-value counts permutations of the adjusted residual reaching it.
    """
    if dataset.Y is None:
        raise EstimationError("dataset has no outcome column")
    if proxy.n != dataset.n:
        raise DimensionMismatch("proxy rows differ from dataset rows", proxy=proxy.n, dataset=dataset.n)
    if permutations < 99:
        raise DomainError("at least 99 permutations are required", permutations=permutations)

    fitted = _outcome_free(dataset, proxy)
    y = dataset.Y
    design = np.column_stack([np.ones(dataset.n), fitted.phi])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    s_y = design @ coef
    residualize = _residualizer(dataset, fitted.s_minus_y)

    r_adj = residualize(y - s_y)
    r_norm = float(np.linalg.norm(r_adj))
    names: List[str] = []
    columns: List[np.ndarray] = []
    for name, term in (("s_y", s_y), ("s_y_sq", (s_y - s_y.mean()) ** 2)):
        spread = float(np.linalg.norm(term - term.mean()))
        adjusted = residualize(term)
        norm = float(np.linalg.norm(adjusted))
        if spread == 0.0 or norm <= _VANISHING * spread:
            continue
        names.append(name)
        columns.append(adjusted / norm)

    if not columns or r_norm <= _VANISHING * max(1.0, float(np.linalg.norm(y - y.mean()))):
        logger.info("Proxy diagnostic has nothing to test; statistic 0")
        return DiagnosticResult(0.0, 1.0, permutations, tuple(names))

    terms = np.column_stack(columns)
    unit_r = r_adj / r_norm
    statistic = float(np.max(np.abs(unit_r @ terms)))
    shuffled = np.stack([unit_r[rng.permutation(dataset.n)] for _ in range(permutations)])
    null = np.max(np.abs(shuffled @ terms), axis=1)
    exceed = int(np.sum(null >= statistic))
    p_value = (1.0 + exceed) / (1.0 + permutations)
    logger.debug("Proxy diagnostic terms=%s statistic=%.4f p=%.4f", names, statistic, p_value)
    return DiagnosticResult(statistic, p_value, permutations, tuple(names))
