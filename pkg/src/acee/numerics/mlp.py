"""Feed-forward rectifier network with exact backpropagation.

Weights are stored as ``(d_in, d_out)`` matrices so a batch ``x`` of shape
``(B, d_in)`` maps through ``x @ W + b``. Hidden layers use ReLU, the output
layer is linear.
"""

from dataclasses import dataclass
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

from ..utils.error_handling import DimensionMismatch
from .random import Rng


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Mlp:
    weights: Tuple[np.ndarray, ...]
    biases: Tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.weights) == 0 or len(self.weights) != len(self.biases):
            raise DimensionMismatch("need one bias per weight matrix and at least one layer")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise DimensionMismatch(f"layer {i} has inconsistent shapes", weight=list(w.shape), bias=list(b.shape))
            if i and self.weights[i - 1].shape[1] != w.shape[0]:
                raise DimensionMismatch(f"layer {i} input does not match previous output")
        object.__setattr__(self, "weights", tuple(_frozen(w) for w in self.weights))
        object.__setattr__(self, "biases", tuple(_frozen(b) for b in self.biases))

    @property
    def dims(self) -> Tuple[int, ...]:
        return (self.weights[0].shape[0],) + tuple(w.shape[1] for w in self.weights)

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def parameters(self) -> List[np.ndarray]:
        """Flat parameter list in optimizer order: W0, b0, W1, b1, ..."""
        out: List[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    @classmethod
    def from_parameters(cls, params: Sequence[np.ndarray]) -> "Mlp":
        return cls(tuple(params[0::2]), tuple(params[1::2]))


class MlpGrad(NamedTuple):
    weights: Tuple[np.ndarray, ...]
    biases: Tuple[np.ndarray, ...]
    inputs: np.ndarray

    def parameters(self) -> List[np.ndarray]:
        out: List[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out


def init_mlp(dims: Sequence[int], rng: Rng) -> Mlp:
    """He-initialized network with zero biases."""
    if len(dims) < 2 or any(d < 1 for d in dims):
        raise DimensionMismatch("an MLP needs at least two positive layer dims", dims=list(dims))
    weights = tuple(
        rng.standard_normal((d_in, d_out)) * np.sqrt(2.0 / d_in) for d_in, d_out in zip(dims[:-1], dims[1:])
    )
    biases = tuple(np.zeros(d_out) for d_out in dims[1:])
    return Mlp(weights, biases)


def _as_batch(net: Mlp, x: np.ndarray) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != net.dims[0]:
        raise DimensionMismatch(f"input width {arr.shape[-1]} does not match {net.dims[0]}", shape=list(arr.shape))
    return arr, single


def forward_with_cache(net: Mlp, x: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:
    """Batched forward pass returning the output and each layer's input."""
    a, _ = _as_batch(net, x)
    cache = [a]
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ w + b
        a = z if i == last else np.maximum(z, 0.0)
        if i != last:
            cache.append(a)
    return a, cache


def backward_from_cache(net: Mlp, cache: List[np.ndarray], output_grad: np.ndarray) -> MlpGrad:
    """Gradients of ``sum(output * output_grad)`` summed over the batch."""
    g = np.asarray(output_grad, dtype=np.float64)
    if g.ndim == 1:
        g = g[None, :]
    if g.shape != (cache[0].shape[0], net.dims[-1]):
        raise DimensionMismatch("output gradient has the wrong shape", shape=list(g.shape))
    n_layers = len(net.weights)
    w_grads: List[np.ndarray] = [np.empty(0)] * n_layers
    b_grads: List[np.ndarray] = [np.empty(0)] * n_layers
    for i in range(n_layers - 1, -1, -1):
        a_in = cache[i]
        w_grads[i] = a_in.T @ g
        b_grads[i] = g.sum(axis=0)
        g = g @ net.weights[i].T
        if i > 0:
            # ReLU derivative, taken as 0 at the kink
            g = g * (a_in > 0.0)
    return MlpGrad(tuple(w_grads), tuple(b_grads), g)


def mlp_forward(net: Mlp, x: np.ndarray) -> np.ndarray:
    arr, single = _as_batch(net, x)
    out, _ = forward_with_cache(net, arr)
    return out[0] if single else out


def mlp_backward(net: Mlp, x: np.ndarray, output_grad: np.ndarray) -> MlpGrad:
    arr, single = _as_batch(net, x)
    _, cache = forward_with_cache(net, arr)
    grads = backward_from_cache(net, cache, output_grad)
    if single:
        return MlpGrad(grads.weights, grads.biases, grads.inputs[0])
    return grads
