"""C(Z) discretized by its values on a fixed finite grid of Z."""

from typing import Any, Dict, Optional, Tuple

import numpy as np

from app.algebras.base import AlgebraDescriptor
from app.exceptions import InvalidDescriptorException

WEIGHT_SUM_TOL = 1e-12


class GridFunctionAlgebra(AlgebraDescriptor):
    """Functions on m grid points of Z with pointwise product and conjugation.

    ``points`` has shape (m, p): each row is a point of Z (p may be 0 for a
    singleton Z). ``weights`` are quadrature weights, positive and summing to 1.
    Continuity is not enforced; the grid is authoritative.
    """

    def __init__(self, points: np.ndarray, weights: Optional[np.ndarray] = None):
        points = np.array(points, dtype=float)
        if points.ndim == 1:
            points = points[:, None]
        if points.ndim != 2 or points.shape[0] < 1:
            raise InvalidDescriptorException(
                f"grid_function points must be an (m, p) array with m >= 1, got shape {points.shape}"
            )
        m = points.shape[0]
        if weights is None:
            weights = np.full(m, 1.0 / m)
        weights = np.array(weights, dtype=float)
        if weights.shape != (m,):
            raise InvalidDescriptorException(
                f"grid_function needs one quadrature weight per point ({m}), got shape {weights.shape}"
            )
        if np.any(weights <= 0):
            raise InvalidDescriptorException("grid_function quadrature weights must be positive")
        if abs(weights.sum() - 1.0) > WEIGHT_SUM_TOL * m:
            raise InvalidDescriptorException(
                f"grid_function quadrature weights must sum to 1, got {weights.sum()!r}"
            )
        self.points = points
        self.weights = weights
        self.points.setflags(write=False)
        self.weights.setflags(write=False)

    @classmethod
    def uniform(cls, m: int, low: float = 0.0, high: float = 1.0) -> "GridFunctionAlgebra":
        """m equispaced points on [low, high] with uniform weights."""
        if int(m) < 1:
            raise InvalidDescriptorException(f"grid_function size must be >= 1, got {m}")
        return cls(np.linspace(low, high, int(m))[:, None])

    @property
    def kind(self) -> str:
        return "grid_function"

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

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
        return np.asarray(a) * np.asarray(b)

    def star_coords(self, a: np.ndarray) -> np.ndarray:
        return np.conj(a)

    def identity_coords(self) -> np.ndarray:
        return np.ones(self.size, dtype=complex)

    def represent(self, a: np.ndarray) -> np.ndarray:
        # multiplication operator on L^2 of the grid
        return np.asarray(a, dtype=complex)[..., :, None] * np.eye(self.size)

    def from_representation(self, matrix: np.ndarray) -> np.ndarray:
        return np.diagonal(np.asarray(matrix, dtype=complex), axis1=-2, axis2=-1).copy()

    def norm_coords(self, a: np.ndarray) -> float:
        return float(np.max(np.abs(a)))

    def is_positive_coords(self, a: np.ndarray, tol: float) -> bool:
        a = np.asarray(a)
        return bool(np.all(np.abs(a.imag) <= tol) and np.all(a.real >= -tol))

    def sqrt_coords(self, a: np.ndarray) -> np.ndarray:
        return np.sqrt(np.clip(np.real(a), 0.0, None)).astype(complex)

    def abs_coords(self, a: np.ndarray) -> np.ndarray:
        return np.abs(a).astype(complex)

    def spec(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "points": self.points.tolist(),
            "weights": self.weights.tolist(),
        }

    def key(self) -> tuple:
        return (self.kind, self.points.shape, self.points.tobytes(), self.weights.tobytes())
