"""Latent-confounder proxies from truncated factor decompositions."""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..effects.dataset import ObservationalDataset
from ..numerics.linalg import as_matrix, svd_truncated
from ..utils.error_handling import ProxyError, RankDeficiencyError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FactorProxy:
    """Constrained least-squares factor fit ``Z ~ Phi Psi^T``.

    ``phi`` satisfies ``phi.T @ phi / n == I_q`` and ``psi.T @ psi`` is
    diagonal. Both live in the (optionally) standardized column space;
    ``s_hat`` maps back through ``scale`` and ``center``, which are 1 and 0
    when the fit was unstandardized, so ``s_hat == phi @ psi.T`` there.
    """

    q: int
    phi: np.ndarray
    psi: np.ndarray
    center: np.ndarray
    scale: np.ndarray
    singular_values: np.ndarray
    columns: Tuple[str, ...]
    standardized: bool = True

    @property
    def n(self) -> int:
        return int(self.phi.shape[0])

    @property
    def s_hat(self) -> np.ndarray:
        return (self.phi @ self.psi.T) * self.scale + self.center

    def column_index(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise ProxyError(f"proxy has no column {name!r}", columns=list(self.columns)) from None

    def block(self, names: Sequence[str]) -> np.ndarray:
        idx = [self.column_index(n) for n in names]
        return self.s_hat[:, idx]

    @property
    def has_outcome(self) -> bool:
        return "Y" in self.columns

    @property
    def s_y(self) -> np.ndarray:
        return self.s_hat[:, self.column_index("Y")]

    @property
    def s_minus_y(self) -> np.ndarray:
        keep = [i for i, c in enumerate(self.columns) if c != "Y"]
        return self.s_hat[:, keep]

    @property
    def minus_y_columns(self) -> List[str]:
        return [c for c in self.columns if c != "Y"]


@dataclass(frozen=True)
class ResidualProxy:
    """``X - (rank-q reconstruction of X)``; the residual-style proxy for DAG effects."""

    q: int
    residual: np.ndarray
    reconstruction: np.ndarray
    columns: Tuple[str, ...]

    def block(self, names: Sequence[str]) -> np.ndarray:
        idx = [self.columns.index(n) for n in names]
        return self.residual[:, idx]


@dataclass(frozen=True)
class EigenGapReport:
    singular_values: np.ndarray
    gap_ratios: np.ndarray
    suggested_q: int


def _check_rank(q: int, n: int, d: int) -> None:
    if q < 1 or q > d:
        raise ProxyError(f"rank q={q} must lie in 1..{d} (included columns)", q=q, columns=d)
    if n < q:
        raise ProxyError(f"need at least q={q} rows, got {n}", q=q, n=n)


def _standardize(z: np.ndarray, columns: Sequence[str]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    center = z.mean(axis=0)
    scale = z.std(axis=0)
    constant = [c for c, s in zip(columns, scale) if s == 0.0]
    if constant:
        raise RankDeficiencyError("constant columns cannot be standardized", columns=constant)
    return (z - center) / scale, center, scale


def factor_proxy_from_matrix(
    z: np.ndarray, q: int, columns: Optional[Sequence[str]] = None, standardize: bool = True
) -> FactorProxy:
    z = as_matrix(z, "Z")
    n, d = z.shape
    columns = tuple(columns) if columns is not None else tuple(f"Z{i + 1}" for i in range(d))
    _check_rank(q, n, d)
    if standardize:
        work, center, scale = _standardize(z, columns)
    else:
        work, center, scale = z, np.zeros(d), np.ones(d)
    svd = svd_truncated(work, q)
    root_n = np.sqrt(n)
    phi = root_n * svd.u
    psi = svd.v * svd.s / root_n
    logger.debug("Factor proxy q=%d on %dx%d, leading singular values %s", q, n, d, svd.s)
    return FactorProxy(q, phi, psi, center, scale, svd.s, columns, standardize)


def fit_factor_proxy(
    dataset: ObservationalDataset,
    q: int,
    include_x: bool = True,
    include_d: bool = True,
    include_y: bool = True,
    standardize: bool = True,
) -> FactorProxy:
    """Rank-``q`` factor fit of the stacked ``[X | D | Y]`` matrix."""
    z, names = dataset.stacked(include_x, include_d, include_y)
    return factor_proxy_from_matrix(z, q, names, standardize)


def fit_residual_proxy(
    X: np.ndarray, q: int, columns: Optional[Sequence[str]] = None, center: bool = True
) -> ResidualProxy:
    X = as_matrix(X, "X")
    n, p = X.shape
    _check_rank(q, n, p)
    mean = X.mean(axis=0) if center else np.zeros(p)
    svd = svd_truncated(X - mean, q)
    reconstruction = svd.reconstruct() + mean
    columns = tuple(columns) if columns is not None else tuple(f"X{i + 1}" for i in range(p))
    return ResidualProxy(q, X - reconstruction, reconstruction, columns)


def eigen_gap_report(z: np.ndarray, max_q: int, standardize: bool = True) -> EigenGapReport:
    """Leading singular values and successive ratios; the largest ratio suggests q.

    Offered as a report only, the rank used for fitting is always explicit.
    """
    z = as_matrix(z, "Z")
    n, d = z.shape
    k = min(max_q + 1, n, d)
    if k < 2:
        raise ProxyError("need at least two singular values for a gap report", max_q=max_q)
    work = _standardize(z, [str(i) for i in range(d)])[0] if standardize else z
    s = svd_truncated(work, k).s
    ratios = np.divide(s[:-1], s[1:], out=np.full(k - 1, np.inf), where=s[1:] > 0)
    suggested = int(np.argmax(ratios[: max_q])) + 1
    return EigenGapReport(s, ratios, suggested)
