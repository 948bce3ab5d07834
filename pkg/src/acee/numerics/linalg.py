"""Dense linear algebra helpers."""

import logging
from typing import NamedTuple

import numpy as np
from scipy import linalg

from ..utils.error_handling import DimensionMismatch, DomainError, NumericFailure

logger = logging.getLogger(__name__)


class TruncatedSvd(NamedTuple):
    u: np.ndarray
    s: np.ndarray
    v: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.s) @ self.v.T


def as_matrix(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Validate a finite 2-D float64 array."""
    arr = np.asarray(m, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D", shape=list(arr.shape))
    if not np.all(np.isfinite(arr)):
        raise NumericFailure(f"{name} contains non-finite entries")
    return arr


def svd_truncated(m: np.ndarray, q: int) -> TruncatedSvd:
    """Rank-``q`` singular value decomposition.

    Columns of ``v`` are sign-normalized so their largest-magnitude entry is
    positive (first occurrence on ties), which makes the factors unique for
    distinct singular values.
    """
    arr = as_matrix(m)
    rows, cols = arr.shape
    if q < 1 or q > min(rows, cols):
        raise DomainError(f"rank {q} outside 1..{min(rows, cols)}", q=q, shape=[rows, cols])

    try:
        u, s, vt = linalg.svd(arr, full_matrices=False, lapack_driver="gesdd")
    except linalg.LinAlgError:
        logger.warning("gesdd did not converge on %dx%d input, retrying with gesvd", rows, cols)
        try:
            u, s, vt = linalg.svd(arr, full_matrices=False, lapack_driver="gesvd")
        except linalg.LinAlgError as exc:
            raise NumericFailure("SVD did not converge", shape=[rows, cols]) from exc

    u = u[:, :q].copy()
    s = s[:q].copy()
    v = vt[:q].T.copy()
    pivots = np.argmax(np.abs(v), axis=0)
    signs = np.where(v[pivots, np.arange(q)] < 0, -1.0, 1.0)
    return TruncatedSvd(u * signs, s, v * signs)
