"""Conditional outcome generators used by the effect estimators."""

from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from ..numerics.random import Rng


@runtime_checkable
class ConditionalGenerator(Protocol):
    """Anything that draws ``m`` outcomes per conditioning row, one stream per row."""

    def sample(self, conds: np.ndarray, m: int, rngs: Sequence[Rng]) -> np.ndarray: ...


class PointMassGenerator:
    """Always returns ``value`` and leaves the streams untouched."""

    def __init__(self, value: float):
        self.value = float(value)

    def sample(self, conds: np.ndarray, m: int, rngs: Sequence[Rng]) -> np.ndarray:
        return np.full((np.atleast_2d(conds).shape[0], m), self.value)


class ShiftedGenerator:
    """Adds ``offset`` to a base generator's draws where ``cond[treatment_column] == 1``."""

    def __init__(self, base: ConditionalGenerator, offset: float, treatment_column: int = -1):
        self.base = base
        self.offset = float(offset)
        self.treatment_column = treatment_column

    def sample(self, conds: np.ndarray, m: int, rngs: Sequence[Rng]) -> np.ndarray:
        conds = np.atleast_2d(np.asarray(conds, dtype=np.float64))
        draws = self.base.sample(conds, m, rngs)
        treated = conds[:, self.treatment_column] == 1.0
        return draws + self.offset * treated[:, None]
