import numpy as np

from acee.config import ArchitectureConfig

TINY = ArchitectureConfig(embed_hidden=(8,), embed_dim=3, head_hidden=(16, 16))


def linear_data(n: int, seed: int):
    """``Y = 2 X + 0.5 eps`` with one standard normal covariate."""
    gen = np.random.default_rng(seed)
    x = gen.standard_normal(n)
    return x[:, None], 2.0 * x + 0.5 * gen.standard_normal(n)
