"""Circulant matrices stored by their generator (first column)."""

from typing import Any, Dict, Tuple

import numpy as np

from app.algebras.base import AlgebraDescriptor
from app.exceptions import InvalidDescriptorException


class CirculantAlgebra(AlgebraDescriptor):
    """d x d circulant matrices; product is cyclic convolution of generators.

    Only the generator vector is stored. The dense matrix exists only inside
    ``represent``.
    """

    def __init__(self, size: int):
        if int(size) < 1:
            raise InvalidDescriptorException(f"circulant size must be >= 1, got {size}")
        self.size = int(size)
        steps = np.arange(self.size)
        # C[i, j] = c[(i - j) mod d]
        self._shift_index = (steps[:, None] - steps[None, :]) % self.size
        self._reflect_index = (-steps) % self.size

    @property
    def kind(self) -> str:
        return "circulant"

    @property
    def coord_shape(self) -> Tuple[int, ...]:
        return (self.size,)

    @property
    def representation_size(self) -> int:
        return self.size

    @property
    def is_commutative(self) -> bool:
        return True

    def mul_coords(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        # (a * b)[k] = sum_j a[j] b[(k - j) mod d], evaluated directly (no FFT rounding)
        return np.einsum("...j,...kj->...k", a, np.asarray(b)[..., self._shift_index])

    def star_coords(self, a: np.ndarray) -> np.ndarray:
        return np.conj(np.asarray(a)[..., self._reflect_index])

    def identity_coords(self) -> np.ndarray:
        identity = np.zeros(self.size, dtype=complex)
        identity[0] = 1.0
        return identity

    def represent(self, a: np.ndarray) -> np.ndarray:
        return np.asarray(a, dtype=complex)[..., self._shift_index]

    def from_representation(self, matrix: np.ndarray) -> np.ndarray:
        return np.asarray(matrix, dtype=complex)[..., :, 0]

    def eigenvalues(self, a: np.ndarray) -> np.ndarray:
        """Spectrum of the circulant matrix: the DFT of its generator."""
        return np.fft.fft(a, axis=-1)

    def norm_coords(self, a: np.ndarray) -> float:
        # circulants are normal, so the operator norm is the spectral radius
        return float(np.max(np.abs(self.eigenvalues(a))))

    def sqrt_coords(self, a: np.ndarray) -> np.ndarray:
        return np.fft.ifft(np.sqrt(np.clip(self.eigenvalues(a).real, 0.0, None)), axis=-1)

    def abs_coords(self, a: np.ndarray) -> np.ndarray:
        return np.fft.ifft(np.abs(self.eigenvalues(a)), axis=-1)

    def spec(self) -> Dict[str, Any]:
        return {"kind": self.kind, "size": self.size}

    def key(self) -> tuple:
        return (self.kind, self.size)
