"""Ordinary complex feed-forward networks, the slices f_z of a C(Z)-valued net."""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from app.exceptions import ShapeMismatchException
from app.net.activations import Activation, build_activation

ParameterIndex = Tuple[int, int, int]


def parameter_index_set(widths: Sequence[int]) -> List[ParameterIndex]:
    """All (j, i, k) with k < d_{j-1} a weight and k = d_{j-1} the bias of unit i in layer j.

    The order matches ``ScalarNet.flat_parameters``; N = sum_j d_j (d_{j-1} + 1).
    """
    indices = []
    for j in range(len(widths) - 1):
        for i in range(widths[j + 1]):
            for k in range(widths[j] + 1):
                indices.append((j, i, k))
    return indices


def split_flat(widths: Sequence[int], values: np.ndarray) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Split (..., N) flat parameters into per-layer (weights (..., d_j, d_j-1), biases (..., d_j))."""
    values = np.asarray(values)
    lead = values.shape[:-1]
    layers = []
    offset = 0
    for j in range(len(widths) - 1):
        din, dout = widths[j], widths[j + 1]
        count = dout * (din + 1)
        block = values[..., offset:offset + count].reshape(lead + (dout, din + 1))
        layers.append((block[..., :din], block[..., din]))
        offset += count
    if offset != values.shape[-1]:
        raise ShapeMismatchException(f"widths {list(widths)} need {offset} parameters, got {values.shape[-1]}")
    return layers


@dataclass
class ScalarNet:
    """f(x) = sigma_L(W^L sigma_{L-1}(... sigma_1(W^1 x + b^1) ...) + b^L) with complex parameters."""

    weights: List[np.ndarray]
    biases: List[np.ndarray]
    activations: List[Activation]

    def __post_init__(self):
        self.weights = [np.array(w, dtype=complex) for w in self.weights]
        self.biases = [np.array(b, dtype=complex) for b in self.biases]
        self.activations = [build_activation(a) for a in self.activations]
        if not self.weights or not (len(self.weights) == len(self.biases) == len(self.activations)):
            raise ShapeMismatchException("ScalarNet needs matching non-empty weight, bias and activation lists")
        for j, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ShapeMismatchException(f"layer {j}: weights {w.shape} and bias {b.shape} are inconsistent")
            if j > 0 and w.shape[1] != self.weights[j - 1].shape[0]:
                raise ShapeMismatchException(
                    f"layer {j} expects {w.shape[1]} inputs but layer {j - 1} has {self.weights[j - 1].shape[0]} outputs"
                )

    @property
    def widths(self) -> List[int]:
        return [int(self.weights[0].shape[1])] + [int(w.shape[0]) for w in self.weights]

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Evaluate on one input (d_0,) or a batch (n, d_0)."""
        h = np.asarray(x, dtype=complex)
        if h.shape[-1] != self.widths[0]:
            raise ShapeMismatchException(f"ScalarNet expects inputs of length {self.widths[0]}, got {h.shape}")
        for w, b, activation in zip(self.weights, self.biases, self.activations):
            h = activation(h @ w.T + b)
        return h

    def flat_parameters(self) -> np.ndarray:
        """Parameters in ``parameter_index_set`` order."""
        return np.concatenate([np.hstack([w, b[:, None]]).ravel() for w, b in zip(self.weights, self.biases)])

    @classmethod
    def from_flat(
        cls,
        widths: Sequence[int],
        values: np.ndarray,
        activations: Union[Sequence[Union[str, Activation]], str, Activation],
    ) -> "ScalarNet":
        layers = split_flat(widths, values)
        if isinstance(activations, (str, Activation)):
            activations = [activations] * len(layers)
        return cls([w for w, _ in layers], [b for _, b in layers], list(activations))

    @classmethod
    def random(
        cls,
        widths: Sequence[int],
        activations: Union[Sequence[Union[str, Activation]], str, Activation],
        seed: int,
        bound: float = 1.0,
        real: bool = True,
    ) -> "ScalarNet":
        """Parameters drawn uniformly from [-bound, bound] (real unless ``real`` is False)."""
        rng = np.random.default_rng(seed)
        count = len(parameter_index_set(widths))
        values = rng.uniform(-bound, bound, count).astype(complex)
        if not real:
            values = values + 1j * rng.uniform(-bound, bound, count)
        return cls.from_flat(widths, values, activations)

    def allclose(self, other: "ScalarNet", atol: float = 1e-12) -> bool:
        if self.widths != other.widths:
            return False
        return bool(np.allclose(self.flat_parameters(), other.flat_parameters(), rtol=0.0, atol=atol)) and [
            a.name for a in self.activations
        ] == [a.name for a in other.activations]

    def max_abs_parameter(self) -> float:
        return float(np.max(np.abs(self.flat_parameters()), initial=0.0))

    def is_real(self, atol: Optional[float] = 0.0) -> bool:
        return bool(np.all(np.abs(self.flat_parameters().imag) <= atol))
