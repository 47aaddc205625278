"""The scalar algebra A = C."""

from typing import Any, Dict, Tuple

import numpy as np

from app.algebras.base import AlgebraDescriptor


class ScalarAlgebra(AlgebraDescriptor):
    """Complex numbers; every RKHM/net construction reduces to its classical form here."""

    @property
    def kind(self) -> str:
        return "scalar"

    @property
    def coord_shape(self) -> Tuple[int, ...]:
        return ()

    @property
    def representation_size(self) -> int:
        return 1

    @property
    def is_commutative(self) -> bool:
        return True

    def mul_coords(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.asarray(a) * np.asarray(b)

    def star_coords(self, a: np.ndarray) -> np.ndarray:
        return np.conj(a)

    def identity_coords(self) -> np.ndarray:
        return np.array(1.0 + 0.0j)

    def represent(self, a: np.ndarray) -> np.ndarray:
        return np.asarray(a, dtype=complex)[..., None, None]

    def from_representation(self, matrix: np.ndarray) -> np.ndarray:
        return np.asarray(matrix)[..., 0, 0]

    def norm_coords(self, a: np.ndarray) -> float:
        return float(np.abs(a))

    def is_positive_coords(self, a: np.ndarray, tol: float) -> bool:
        value = complex(a)
        return abs(value.imag) <= tol and value.real >= -tol

    def sqrt_coords(self, a: np.ndarray) -> np.ndarray:
        return np.sqrt(np.clip(np.real(a), 0.0, None)).astype(complex)

    def abs_coords(self, a: np.ndarray) -> np.ndarray:
        return np.abs(a).astype(complex)

    def spec(self) -> Dict[str, Any]:
        return {"kind": self.kind}

    def key(self) -> tuple:
        return (self.kind,)
