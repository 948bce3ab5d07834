import numpy as np

from acee.effects import ObservationalDataset


class NoisyMeanGenerator:
    """Draws ``N(sum(cond), 1)`` from each row's own stream."""

    def sample(self, conds, m, rngs):
        conds = np.atleast_2d(conds)
        return np.stack([r.normal(c.sum(), 1.0, m) for c, r in zip(conds, rngs)]) if len(conds) else np.empty((0, m))


class LinearMeanGenerator:
    """Point mass at ``x[0] + slope * d`` plus ``offset`` on treated rows."""

    def __init__(self, slope: float = 2.0, offset: float = 0.0):
        self.slope = slope
        self.offset = offset

    def sample(self, conds, m, rngs):
        conds = np.atleast_2d(conds)
        d = conds[:, -1]
        mean = conds[:, 0] + (self.slope + self.offset) * d
        return np.repeat(mean[:, None], m, axis=1)


def random_dataset(seed: int, n: int, p: int = 2) -> ObservationalDataset:
    gen = np.random.default_rng(seed)
    D = gen.integers(0, 2, n)
    D[0], D[1] = 0, 1
    X = gen.standard_normal((n, p))
    Y = X.sum(axis=1) + D + gen.standard_normal(n)
    return ObservationalDataset(X=X, D=D, Y=Y)
