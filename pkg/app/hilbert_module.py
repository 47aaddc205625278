"""The Hilbert C*-module A^d with its A-valued inner product.

Right modules only: A acts on A^d by u c = (u_1 c, ..., u_d c). All
implemented modules are finitely generated over finite-dimensional algebras,
so they are already complete.
"""

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from app.algebra import AlgebraElement
from app.algebras.base import AlgebraDescriptor
from app.exceptions import DescriptorMismatchException, ShapeMismatchException


@dataclass(frozen=True, eq=False)
class ModuleVector:
    """A length-d tuple of algebra elements, stored as one (d, *coord_shape) array."""

    descriptor: AlgebraDescriptor
    coords: np.ndarray

    def __post_init__(self):
        coords = np.array(self.coords, dtype=complex)
        expected = self.descriptor.coord_shape
        if coords.ndim != 1 + len(expected) or coords.shape[1:] != expected or coords.shape[0] < 1:
            raise ShapeMismatchException(
                f"ModuleVector over {self.descriptor.kind} needs shape (d >= 1, *{expected}), got {coords.shape}"
            )
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @classmethod
    def from_elements(cls, elements: Sequence[AlgebraElement]) -> "ModuleVector":
        if not elements:
            raise ShapeMismatchException("ModuleVector needs at least one entry")
        descriptor = elements[0].descriptor
        for element in elements[1:]:
            if element.descriptor != descriptor:
                raise DescriptorMismatchException("All ModuleVector entries must share one descriptor")
        return cls(descriptor, np.stack([element.coords for element in elements]))

    @classmethod
    def zeros(cls, descriptor: AlgebraDescriptor, length: int) -> "ModuleVector":
        return cls(descriptor, np.zeros((length,) + descriptor.coord_shape, dtype=complex))

    @classmethod
    def constant(cls, descriptor: AlgebraDescriptor, values: Sequence[complex]) -> "ModuleVector":
        """Lift a complex vector to (x_1 1_A, ..., x_d 1_A)."""
        values = np.asarray(values, dtype=complex).reshape(-1)
        identity = descriptor.identity_coords()
        return cls(descriptor, values.reshape((-1,) + (1,) * identity.ndim) * identity)

    @property
    def length(self) -> int:
        return int(self.coords.shape[0])

    @property
    def entries(self) -> List[AlgebraElement]:
        return [AlgebraElement(self.descriptor, c) for c in self.coords]

    def __getitem__(self, index: int) -> AlgebraElement:
        return AlgebraElement(self.descriptor, self.coords[index])

    def __add__(self, other: "ModuleVector") -> "ModuleVector":
        _check_vectors(self, other)
        return ModuleVector(self.descriptor, self.coords + other.coords)

    def __sub__(self, other: "ModuleVector") -> "ModuleVector":
        _check_vectors(self, other)
        return ModuleVector(self.descriptor, self.coords - other.coords)

    def __mul__(self, c: AlgebraElement) -> "ModuleVector":
        return right_mul(self, c)


def _check_vectors(u: ModuleVector, v: ModuleVector) -> None:
    if u.descriptor != v.descriptor:
        raise DescriptorMismatchException("Module vectors belong to different algebras")
    if u.length != v.length:
        raise ShapeMismatchException(f"Module vector lengths differ: {u.length} vs {v.length}")


def right_mul(u: ModuleVector, c: AlgebraElement) -> ModuleVector:
    """Entrywise u_i c."""
    if u.descriptor != c.descriptor:
        raise DescriptorMismatchException("Module vector and scalar element belong to different algebras")
    return ModuleVector(u.descriptor, u.descriptor.mul_coords(u.coords, c.coords))


def inner(u: ModuleVector, v: ModuleVector) -> AlgebraElement:
    """A-valued inner product <u, v> = sum_i u_i* v_i (linear in v)."""
    _check_vectors(u, v)
    descriptor = u.descriptor
    products = descriptor.mul_coords(descriptor.star_coords(u.coords), v.coords)
    return AlgebraElement(descriptor, products.sum(axis=0))


def abs_vec(u: ModuleVector) -> AlgebraElement:
    """A-valued absolute value |u| = <u, u>^{1/2}."""
    gram = inner(u, u)
    return AlgebraElement(u.descriptor, u.descriptor.sqrt_coords(gram.coords))


def norm_vec(u: ModuleVector) -> float:
    """Real norm ||u|| = || |u| ||_A."""
    return abs_vec(u).norm()

