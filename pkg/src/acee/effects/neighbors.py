"""Exact within-arm nearest neighbors and matching counts."""

import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
from scipy.spatial.distance import cdist

from ..utils.error_handling import DimensionMismatch, DomainError, EstimationError

logger = logging.getLogger(__name__)

_BLOCK_ROWS = 2048


@dataclass(frozen=True)
class NeighborIndex:
    """``neighbors[d][i]`` lists the arm-``d`` neighbors of unit ``i`` (row indices).

    ``counts[i]`` is the matching count: how many units, across both arms,
    hold ``i`` in their neighbor set for ``i``'s own arm.
    """

    neighbors: Dict[int, np.ndarray]
    n_neighbors: Dict[int, int]
    counts: np.ndarray
    include_self: bool = True


def _arm_members(labels: np.ndarray, arm: int) -> np.ndarray:
    members = np.flatnonzero(labels == arm)
    if members.size == 0:
        raise EstimationError(f"treatment arm {arm} is empty", arm=arm)
    return members


def knn_query(
    points: np.ndarray,
    labels: np.ndarray,
    query: np.ndarray,
    arm: int,
    N: int,
    tie_keys: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Indices of the ``N`` nearest arm members to ``query``, nearest first.

    Distances are exact squared Euclidean; equal distances go to the lower
    tie key (the row index unless ``tie_keys`` is given).
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    labels = np.asarray(labels).ravel()
    if labels.shape[0] != points.shape[0]:
        raise DimensionMismatch("one arm label per point required")
    if N < 1:
        raise DomainError("N must be at least 1", N=N)
    members = _arm_members(labels, arm)
    keys = np.arange(points.shape[0]) if tie_keys is None else np.asarray(tie_keys)
    d2 = cdist(np.asarray(query, dtype=np.float64).reshape(1, -1), points[members], "sqeuclidean")[0]
    order = np.lexsort((keys[members], d2))
    return members[order[: min(N, members.size)]]


def _standardized(features: np.ndarray) -> np.ndarray:
    scale = features.std(axis=0)
    return (features - features.mean(axis=0)) / np.where(scale > 0, scale, 1.0)


def build_neighbor_index(
    features: np.ndarray,
    D: np.ndarray,
    N: int,
    unit_ids: Optional[np.ndarray] = None,
    standardize: bool = True,
    include_self: bool = True,
) -> NeighborIndex:
    """Neighbor sets of every unit within each arm, with matching counts.

    Arm members are ranked by distance, then by unit id, so the sets do not
    depend on row order. ``N`` larger than an arm is clipped with a warning.
    """
    F = np.atleast_2d(np.asarray(features, dtype=np.float64))
    D = np.asarray(D).ravel()
    n = F.shape[0]
    if D.shape[0] != n:
        raise DimensionMismatch("one treatment label per feature row required")
    if N < 1:
        raise DomainError("N must be at least 1", N=N)
    ids = np.arange(n) if unit_ids is None else np.asarray(unit_ids).ravel()
    if standardize:
        F = _standardized(F)

    neighbors: Dict[int, np.ndarray] = {}
    n_neighbors: Dict[int, int] = {}
    counts = np.zeros(n, dtype=np.int64)
    for arm in (0, 1):
        members = _arm_members(D, arm)
        members = members[np.argsort(ids[members], kind="stable")]
        available = members.size if include_self else members.size - 1
        if available < 1:
            raise EstimationError(f"arm {arm} has no neighbors to offer", arm=arm, size=int(members.size))
        k = min(N, available)
        if k < N:
            logger.warning("Arm %d has %d candidate neighbors, clipping N=%d to %d", arm, available, N, k)
        sets = np.empty((n, k), dtype=np.int64)
        for start in range(0, n, _BLOCK_ROWS):
            rows = np.arange(start, min(start + _BLOCK_ROWS, n))
            d2 = cdist(F[rows], F[members], "sqeuclidean")
            if not include_self:
                own = np.flatnonzero(np.isin(rows, members))
                positions = np.searchsorted(ids[members], ids[rows[own]])
                d2[own, positions] = np.inf
            sets[rows] = members[np.argsort(d2, axis=1, kind="stable")[:, :k]]
        neighbors[arm] = sets
        n_neighbors[arm] = k
        counts += np.bincount(sets.ravel(), minlength=n)
    return NeighborIndex(neighbors, n_neighbors, counts, include_self)
