"""Seedable random streams.

Every stochastic routine takes a ``numpy.random.Generator``. Streams are
derived from a root seed plus integer keys (unit id, arm, replication, ...)
so that identical keys always reproduce identical draws, independent of the
order in which other streams are consumed.
"""

from typing import Union

import numpy as np

from ..utils.error_handling import DomainError

Rng = np.random.Generator


def make_rng(seed: int, *stream: int) -> Rng:
    """Generator for the stream ``(seed, *stream)``."""
    if seed < 0 or any(key < 0 for key in stream):
        raise DomainError("seed and stream keys must be non-negative", seed=seed, stream=list(stream))
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in stream))
    return np.random.Generator(np.random.PCG64(sequence))


def sample_normal(rng: Rng, mean: Union[float, np.ndarray], sd: float, n: int) -> np.ndarray:
    if sd < 0:
        raise DomainError("standard deviation must be non-negative", sd=sd)
    if n < 0:
        raise DomainError("sample size must be non-negative", n=n)
    return mean + sd * rng.standard_normal(n)
