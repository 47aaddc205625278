"""Algebra elements and the generic C*-algebra operations."""

import numbers
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from app.algebras.base import AlgebraDescriptor
from app.config import config
from app.exceptions import DescriptorMismatchException, ShapeMismatchException

Scalar = Union[int, float, complex, np.number]


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """One element of a concrete C*-algebra, stored by its coordinates.

    Immutable: the coordinate array is copied and made read-only.
    """

    descriptor: AlgebraDescriptor
    coords: np.ndarray

    def __post_init__(self):
        coords = np.array(self.coords, dtype=complex)
        if coords.shape != self.descriptor.coord_shape:
            raise ShapeMismatchException(
                f"{self.descriptor.kind} coordinates must have shape {self.descriptor.coord_shape}, "
                f"got {coords.shape}"
            )
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @classmethod
    def identity(cls, descriptor: AlgebraDescriptor) -> "AlgebraElement":
        return cls(descriptor, descriptor.identity_coords())

    @classmethod
    def zero(cls, descriptor: AlgebraDescriptor) -> "AlgebraElement":
        return cls(descriptor, descriptor.zero_coords())

    @classmethod
    def random(cls, descriptor: AlgebraDescriptor, rng: np.random.Generator, real: bool = False) -> "AlgebraElement":
        return cls(descriptor, descriptor.random_coords(rng, real=real))

    @property
    def kind(self) -> str:
        return self.descriptor.kind

    def star(self) -> "AlgebraElement":
        return star(self)

    def norm(self) -> float:
        return norm(self)

    def allclose(self, other: "AlgebraElement", atol: float = 1e-12) -> bool:
        _check_same(self, other)
        return bool(np.allclose(self.coords, other.coords, rtol=0.0, atol=atol))

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        return add(self, other)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        _check_same(self, other)
        return AlgebraElement(self.descriptor, self.coords - other.coords)

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.descriptor, -self.coords)

    def __mul__(self, other: Union["AlgebraElement", Scalar]) -> "AlgebraElement":
        if isinstance(other, AlgebraElement):
            return mul(self, other)
        if isinstance(other, numbers.Number):
            return scale(self, other)
        return NotImplemented

    def __rmul__(self, other: Scalar) -> "AlgebraElement":
        if isinstance(other, numbers.Number):
            return scale(self, other)
        return NotImplemented

    def __abs__(self) -> "AlgebraElement":
        return absolute(self)

    def __repr__(self) -> str:
        return f"AlgebraElement(kind={self.kind}, coords={self.coords.tolist()!r})"


def _check_same(a: AlgebraElement, b: AlgebraElement) -> None:
    if a.descriptor != b.descriptor:
        raise DescriptorMismatchException(
            f"Operands belong to different algebras: {a.descriptor!r} vs {b.descriptor!r}"
        )


def add(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Coordinatewise sum."""
    _check_same(a, b)
    return AlgebraElement(a.descriptor, a.coords + b.coords)


def scale(a: AlgebraElement, alpha: Scalar) -> AlgebraElement:
    """Complex scalar multiple alpha * a."""
    return AlgebraElement(a.descriptor, complex(alpha) * a.coords)


def mul(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Algebra product a b (pointwise, matrix, cyclic or group convolution by kind)."""
    _check_same(a, b)
    return AlgebraElement(a.descriptor, a.descriptor.mul_coords(a.coords, b.coords))


def star(a: AlgebraElement) -> AlgebraElement:
    """Involution a*."""
    return AlgebraElement(a.descriptor, a.descriptor.star_coords(a.coords))


def norm(a: AlgebraElement) -> float:
    """C*-norm of a."""
    return a.descriptor.norm_coords(a.coords)


def is_positive(a: AlgebraElement, tol: Optional[float] = None) -> bool:
    """True iff a is Hermitian with spectrum >= -tol in its faithful representation."""
    if tol is None:
        tol = config.CSTAR_POSITIVITY_TOL
    if tol < 0:
        raise ValueError(f"tol must be >= 0, got {tol}")
    return a.descriptor.is_positive_coords(a.coords, tol)


def absolute(a: AlgebraElement) -> AlgebraElement:
    """|a|: the unique positive d with d^2 = a* a."""
    return AlgebraElement(a.descriptor, a.descriptor.abs_coords(a.coords))


def leq(a: AlgebraElement, b: AlgebraElement, tol: Optional[float] = None) -> bool:
    """a <=_A b, i.e. b - a is positive."""
    _check_same(a, b)
    return is_positive(b - a, tol)


def regular_representation(a: AlgebraElement) -> np.ndarray:
    """Faithful matrix *-representation R(a)."""
    return a.descriptor.represent(a.coords)


def operator_norm(a: AlgebraElement) -> float:
    """Spectral norm of R(a); equals ``norm`` for every kind."""
    return float(np.linalg.norm(regular_representation(a), ord=2))


def hilbert_schmidt_norm(a: AlgebraElement) -> float:
    """Frobenius norm of R(a)."""
    return float(np.linalg.norm(regular_representation(a), ord="fro"))
