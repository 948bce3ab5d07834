"""Observational dataset container."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..utils.error_handling import DimensionMismatch, EstimationError, NumericFailure, SchemaError


@dataclass(frozen=True)
class ObservationalDataset:
    """Covariates ``X`` with optional binary treatment ``D`` and outcome ``Y``.

    ``unit_ids`` identify units independently of row position; per-unit random
    streams are keyed on them so that row permutations permute results.
    """

    X: np.ndarray
    D: Optional[np.ndarray] = None
    Y: Optional[np.ndarray] = None
    columns: Tuple[str, ...] = ()
    unit_ids: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    def __post_init__(self) -> None:
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2:
            raise DimensionMismatch("X must be 2-D", shape=list(X.shape))
        n = X.shape[0]
        if not np.all(np.isfinite(X)):
            raise NumericFailure("X contains non-finite entries")
        object.__setattr__(self, "X", X)

        if self.D is not None:
            D = np.asarray(self.D, dtype=np.float64).ravel()
            if D.shape[0] != n:
                raise DimensionMismatch("D length differs from X rows", n=n, d=int(D.shape[0]))
            bad = ~np.isin(D, (0.0, 1.0))
            if bad.any():
                raise SchemaError("treatment must be 0 or 1", row=int(np.flatnonzero(bad)[0]))
            object.__setattr__(self, "D", D.astype(np.int64))
        if self.Y is not None:
            Y = np.asarray(self.Y, dtype=np.float64).ravel()
            if Y.shape[0] != n:
                raise DimensionMismatch("Y length differs from X rows", n=n, y=int(Y.shape[0]))
            if not np.all(np.isfinite(Y)):
                raise NumericFailure("Y contains non-finite entries")
            object.__setattr__(self, "Y", Y)

        columns = tuple(self.columns) or tuple(f"X{i + 1}" for i in range(X.shape[1]))
        if len(columns) != X.shape[1]:
            raise DimensionMismatch("column names do not match X width", columns=list(columns))
        object.__setattr__(self, "columns", columns)

        ids = np.asarray(self.unit_ids, dtype=np.int64).ravel()
        if ids.size == 0:
            ids = np.arange(n, dtype=np.int64)
        if ids.shape[0] != n or np.unique(ids).size != n:
            raise DimensionMismatch("unit_ids must be unique and one per row")
        if (ids < 0).any():
            raise SchemaError("unit_ids must be non-negative")
        object.__setattr__(self, "unit_ids", ids)

    @property
    def n(self) -> int:
        return int(self.X.shape[0])

    @property
    def p(self) -> int:
        return int(self.X.shape[1])

    def arm_counts(self) -> Dict[int, int]:
        if self.D is None:
            return {}
        return {0: int(np.sum(self.D == 0)), 1: int(np.sum(self.D == 1))}

    def require_treatment(self) -> Tuple[np.ndarray, np.ndarray]:
        """Return ``(D, Y)``, checking both exist and both arms are non-empty."""
        if self.D is None or self.Y is None:
            raise EstimationError("dataset has no treatment/outcome columns")
        counts = self.arm_counts()
        if counts[0] == 0 or counts[1] == 0:
            raise EstimationError("both treatment arms must be non-empty", arms=counts)
        return self.D, self.Y

    def stacked(self, x: bool = True, d: bool = True, y: bool = True) -> Tuple[np.ndarray, List[str]]:
        """Column-stacked ``[X | D | Y]`` restricted to the included blocks."""
        blocks: List[np.ndarray] = []
        names: List[str] = []
        if x:
            blocks.append(self.X)
            names.extend(self.columns)
        if d and self.D is not None:
            blocks.append(self.D[:, None].astype(np.float64))
            names.append("D")
        if y and self.Y is not None:
            blocks.append(self.Y[:, None])
            names.append("Y")
        if not blocks:
            raise SchemaError("no columns selected")
        return np.hstack(blocks), names

    def take(self, rows: Sequence[int]) -> "ObservationalDataset":
        idx = np.asarray(rows, dtype=np.int64)
        return ObservationalDataset(
            X=self.X[idx],
            D=None if self.D is None else self.D[idx],
            Y=None if self.Y is None else self.Y[idx],
            columns=self.columns,
            unit_ids=self.unit_ids[idx],
        )
