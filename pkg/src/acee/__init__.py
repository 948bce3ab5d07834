"""acee - augmented causal effect estimation with diffusion-generated counterfactuals."""

try:
    from ._version import version as __version__
except ImportError:
    __version__ = "unknown"

__all__ = ["__version__"]
