"""Basis-coefficient parameterization of grid-function weights.

Each weight is w_ik(z) = sum_l c_lik v_l(z); only the coefficients c and
constant biases are trained.
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from app.exceptions import InvalidDescriptorException, ShapeMismatchException
from app.models import BasisPayload
from app.serialization import array_to_payload, payload_to_array


def monomial_evaluation(points: np.ndarray, count: int) -> np.ndarray:
    """v_l(z) = z^(l-1) for l = 1..count on a one-dimensional grid."""
    points = np.asarray(points, dtype=float)
    if points.ndim == 2:
        if points.shape[1] != 1:
            raise ShapeMismatchException(f"monomial basis needs one-dimensional grid points, got shape {points.shape}")
        points = points[:, 0]
    return np.vander(points, N=count, increasing=True)


@dataclass
class BasisWeights:
    """Basis evaluation on the grid plus per-layer coefficients and constant biases.

    ``evaluation`` has shape (grid size, m); ``coefficients[j]`` has shape
    (m, d_j, d_{j-1}) and ``biases[j]`` shape (d_j,).
    """

    evaluation: np.ndarray
    coefficients: List[np.ndarray]
    biases: List[np.ndarray]

    def __post_init__(self):
        self.evaluation = np.array(self.evaluation, dtype=complex)
        if self.evaluation.ndim != 2 or self.evaluation.shape[1] < 1:
            raise InvalidDescriptorException(
                f"basis evaluation must be a (grid, m >= 1) matrix, got shape {self.evaluation.shape}"
            )
        rank = np.linalg.matrix_rank(self.evaluation)
        if rank < self.evaluation.shape[1]:
            raise InvalidDescriptorException(
                f"basis evaluation matrix must have full column rank {self.evaluation.shape[1]}, got rank {rank}"
            )
        self.coefficients = [np.array(c, dtype=complex) for c in self.coefficients]
        self.biases = [np.array(b, dtype=complex) for b in self.biases]
        if len(self.coefficients) != len(self.biases):
            raise ShapeMismatchException("basis needs one bias vector per coefficient tensor")
        for c, b in zip(self.coefficients, self.biases):
            if c.ndim != 3 or c.shape[0] != self.size or b.shape != (c.shape[1],):
                raise ShapeMismatchException(
                    f"basis coefficients (m={self.size}, d_j, d_j-1) and biases (d_j,) mismatch: {c.shape}, {b.shape}"
                )

    @property
    def size(self) -> int:
        """Number of basis functions m."""
        return int(self.evaluation.shape[1])

    @property
    def grid_size(self) -> int:
        return int(self.evaluation.shape[0])

    def layer_weights(self, j: int) -> Tuple[np.ndarray, np.ndarray]:
        """Grid coordinates of layer j: weights (d_j, d_j-1, grid) and biases (d_j, grid)."""
        weights = np.einsum("zl,lik->ikz", self.evaluation, self.coefficients[j])
        biases = self.biases[j][:, None] * np.ones(self.grid_size)
        return weights, biases

    def pullback(self, weight_grad: np.ndarray, bias_grad: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Gradients with respect to (c_j, bias_j) from gradients with respect to the grid coordinates."""
        return (
            np.einsum("zl,ikz->lik", self.evaluation.conj(), weight_grad),
            bias_grad.sum(axis=-1),
        )

    def to_payload(self) -> BasisPayload:
        return BasisPayload(
            evaluation=array_to_payload(self.evaluation),
            coefficients=[array_to_payload(c) for c in self.coefficients],
            biases=[array_to_payload(b) for b in self.biases],
        )

    @classmethod
    def from_payload(cls, payload: BasisPayload) -> "BasisWeights":
        return cls(
            payload_to_array(payload.evaluation),
            [payload_to_array(c) for c in payload.coefficients],
            [payload_to_array(b) for b in payload.biases],
        )
