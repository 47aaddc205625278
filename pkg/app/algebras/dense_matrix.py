"""Full matrix algebra B(W) for a d-dimensional Hilbert space W."""

from typing import Any, Dict, Tuple

import numpy as np

from app.algebras.base import AlgebraDescriptor
from app.exceptions import InvalidDescriptorException


class DenseMatrixAlgebra(AlgebraDescriptor):
    """d x d complex matrices with the operator norm."""

    def __init__(self, size: int):
        if int(size) < 1:
            raise InvalidDescriptorException(f"dense_matrix size must be >= 1, got {size}")
        self.size = int(size)

    @property
    def kind(self) -> str:
        return "dense_matrix"

    @property
    def coord_shape(self) -> Tuple[int, ...]:
        return (self.size, self.size)

    @property
    def representation_size(self) -> int:
        return self.size

    @property
    def is_commutative(self) -> bool:
        return self.size == 1

    def mul_coords(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.matmul(a, b)

    def star_coords(self, a: np.ndarray) -> np.ndarray:
        return np.conj(np.swapaxes(a, -1, -2))

    def identity_coords(self) -> np.ndarray:
        return np.eye(self.size, dtype=complex)

    def represent(self, a: np.ndarray) -> np.ndarray:
        return np.asarray(a, dtype=complex)

    def from_representation(self, matrix: np.ndarray) -> np.ndarray:
        return np.asarray(matrix, dtype=complex)

    def spec(self) -> Dict[str, Any]:
        return {"kind": self.kind, "size": self.size}

    def key(self) -> tuple:
        return (self.kind, self.size)
