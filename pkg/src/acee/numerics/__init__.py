"""Deterministic numerical kernel."""

from .linalg import TruncatedSvd, as_matrix, svd_truncated
from .mlp import Mlp, MlpGrad, backward_from_cache, forward_with_cache, init_mlp, mlp_backward, mlp_forward
from .optim import AdamState, AdamUpdate, adam_init, adam_step
from .random import Rng, make_rng, sample_normal

__all__ = [
    "AdamState",
    "AdamUpdate",
    "Mlp",
    "MlpGrad",
    "Rng",
    "TruncatedSvd",
    "adam_init",
    "adam_step",
    "as_matrix",
    "backward_from_cache",
    "forward_with_cache",
    "init_mlp",
    "make_rng",
    "mlp_backward",
    "mlp_forward",
    "sample_normal",
]
