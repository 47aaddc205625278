"""Base class for C*-algebra descriptors."""

from abc import ABC, abstractmethod
from typing import Any, Dict, Tuple

import numpy as np
from scipy import linalg

from app.exceptions import NumericalException


class AlgebraDescriptor(ABC):
    """Base class for all finite-dimensional C*-algebras.

    A descriptor owns the arithmetic on coordinate arrays. Every coordinate
    method accepts arrays with arbitrary leading (batch) axes followed by
    ``coord_shape`` and broadcasts over them.
    """

    @property
    @abstractmethod
    def kind(self) -> str:
        """Algebra kind name."""
        pass

    @property
    @abstractmethod
    def coord_shape(self) -> Tuple[int, ...]:
        """Shape of the coordinate array of one element."""
        pass

    @property
    @abstractmethod
    def representation_size(self) -> int:
        """Size N of the faithful N x N matrix representation."""
        pass

    @property
    def is_commutative(self) -> bool:
        return False

    @abstractmethod
    def mul_coords(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Algebra product of coordinate arrays."""
        pass

    @abstractmethod
    def star_coords(self, a: np.ndarray) -> np.ndarray:
        """Involution of coordinate arrays."""
        pass

    @abstractmethod
    def identity_coords(self) -> np.ndarray:
        """Coordinates of the unit 1_A."""
        pass

    @abstractmethod
    def represent(self, a: np.ndarray) -> np.ndarray:
        """Faithful *-representation: (..., *coord_shape) -> (..., N, N)."""
        pass

    @abstractmethod
    def from_representation(self, matrix: np.ndarray) -> np.ndarray:
        """Pull a matrix in the image of ``represent`` back to coordinates."""
        pass

    @abstractmethod
    def spec(self) -> Dict[str, Any]:
        """JSON-compatible description (see ``app.models.AlgebraSpec``)."""
        pass

    @abstractmethod
    def key(self) -> tuple:
        """Hashable identity used for descriptor equality."""
        pass

    @property
    def coord_size(self) -> int:
        return int(np.prod(self.coord_shape, dtype=int))

    def zero_coords(self) -> np.ndarray:
        return np.zeros(self.coord_shape, dtype=complex)

    def random_coords(self, rng: np.random.Generator, real: bool = False) -> np.ndarray:
        """Draw i.i.d. standard normal coordinates (complex unless ``real``)."""
        coords = rng.standard_normal(self.coord_shape).astype(complex)
        if not real:
            coords = coords + 1j * rng.standard_normal(self.coord_shape)
        return coords

    def norm_coords(self, a: np.ndarray) -> float:
        """C*-norm: largest singular value of the faithful representation."""
        return float(np.linalg.norm(self.represent(a), ord=2))

    def is_positive_coords(self, a: np.ndarray, tol: float) -> bool:
        """Hermitian within ``tol`` and spectrum >= -tol."""
        matrix = self.represent(a)
        if np.max(np.abs(matrix - matrix.conj().T), initial=0.0) > tol:
            return False
        hermitian = 0.5 * (matrix + matrix.conj().T)
        try:
            eigenvalues = linalg.eigvalsh(hermitian)
        except linalg.LinAlgError as e:
            raise NumericalException(f"Eigenvalue computation failed for {self.kind}: {e}") from e
        return bool(eigenvalues.min() >= -tol)

    def sqrt_coords(self, a: np.ndarray) -> np.ndarray:
        """Positive square root of a positive element (negative eigenvalues clipped to 0)."""
        matrix = self.represent(a)
        try:
            eigenvalues, eigenvectors = linalg.eigh(0.5 * (matrix + matrix.conj().T))
        except linalg.LinAlgError as e:
            raise NumericalException(f"Eigendecomposition failed for {self.kind}: {e}") from e
        root = (eigenvectors * np.sqrt(np.clip(eigenvalues, 0.0, None))) @ eigenvectors.conj().T
        return self.from_representation(root)

    def abs_coords(self, a: np.ndarray) -> np.ndarray:
        """|a| = (a* a)^{1/2}."""
        return self.sqrt_coords(self.mul_coords(self.star_coords(a), a))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AlgebraDescriptor):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.spec()})"
