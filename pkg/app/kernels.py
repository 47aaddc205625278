"""A-valued positive definite kernels and block Gram matrices."""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Type

import numpy as np
from scipy import linalg
from scipy.spatial.distance import cdist

from app.algebra import AlgebraElement, is_positive
from app.algebras.base import AlgebraDescriptor
from app.config import config
from app.exceptions import InvalidKernelException, NumericalException, ShapeMismatchException
from app.models import KernelSpec, KernelTermSpec
from app.parallel import parallel_map
from app.serialization import element_from_payload, element_to_payload

logger = logging.getLogger(__name__)


class ScalarKernel(ABC):
    """Base class for real positive definite kernels on R^p."""

    @property
    @abstractmethod
    def name(self) -> str:
        """Kernel name."""
        pass

    @abstractmethod
    def matrix(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """
        Kernel matrix between two point sets.

        Args:
            X: (n_x, p) points
            Y: (n_y, p) points

        Returns:
            (n_x, n_y) real matrix kappa(x_i, y_j)
        """
        pass

    def term_spec(self, coefficient: AlgebraElement) -> KernelTermSpec:
        return KernelTermSpec(base=self.name, coefficient=element_to_payload(coefficient))

    def key(self) -> tuple:
        return (self.name,)


class GaussianKernel(ScalarKernel):
    """exp(-gamma |x - y|^2)."""

    def __init__(self, gamma: float = 1.0):
        if gamma <= 0:
            raise InvalidKernelException(f"Gaussian bandwidth gamma must be > 0, got {gamma}")
        self.gamma = float(gamma)

    @property
    def name(self) -> str:
        return "gaussian"

    def matrix(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        return np.exp(-self.gamma * cdist(X, Y, "sqeuclidean"))

    def term_spec(self, coefficient: AlgebraElement) -> KernelTermSpec:
        return KernelTermSpec(base=self.name, gamma=self.gamma, coefficient=element_to_payload(coefficient))

    def key(self) -> tuple:
        return (self.name, self.gamma)


class LinearKernel(ScalarKernel):
    """<x, y>."""

    @property
    def name(self) -> str:
        return "linear"

    def matrix(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=float) @ np.asarray(Y, dtype=float).T


BASE_KERNELS: Dict[str, Type[ScalarKernel]] = {
    "gaussian": GaussianKernel,
    "linear": LinearKernel,
}


def build_base_kernel(term: KernelTermSpec) -> ScalarKernel:
    if term.base == "gaussian":
        return GaussianKernel(term.gamma)
    if term.base in BASE_KERNELS:
        return BASE_KERNELS[term.base]()
    raise InvalidKernelException(f"Unknown base kernel '{term.base}'. Known: {', '.join(BASE_KERNELS)}")


class AKernel:
    """k(x, y) = sum_r a_r kappa_r(x, y) with positive coefficients a_r.

    Positive a_r and positive definite kappa_r make k an A-valued positive
    definite kernel with k(x, y) = k(y, x)*.
    """

    def __init__(
        self,
        descriptor: AlgebraDescriptor,
        input_dim: int,
        terms: Sequence[Tuple[ScalarKernel, AlgebraElement]],
        allow_indefinite: bool = False,
    ):
        if input_dim < 1:
            raise InvalidKernelException(f"input_dim must be >= 1, got {input_dim}")
        if not terms:
            raise InvalidKernelException("An A-valued kernel needs at least one term")
        for base, coefficient in terms:
            if coefficient.descriptor != descriptor:
                raise InvalidKernelException(
                    f"Coefficient of the {base.name} term belongs to {coefficient.descriptor!r}, not {descriptor!r}"
                )
            if not allow_indefinite and not is_positive(coefficient):
                raise InvalidKernelException(
                    f"Coefficient of the {base.name} term is not positive; pass allow_indefinite=True to override"
                )
        self.descriptor = descriptor
        self.input_dim = int(input_dim)
        self.terms: List[Tuple[ScalarKernel, AlgebraElement]] = list(terms)
        self.allow_indefinite = allow_indefinite

    @classmethod
    def gaussian(
        cls,
        descriptor: AlgebraDescriptor,
        input_dim: int,
        gamma: float = 1.0,
        coefficient: Optional[AlgebraElement] = None,
        allow_indefinite: bool = False,
    ) -> "AKernel":
        """Single Gaussian term with coefficient ``coefficient`` (default 1_A)."""
        if coefficient is None:
            coefficient = AlgebraElement.identity(descriptor)
        return cls(descriptor, input_dim, [(GaussianKernel(gamma), coefficient)], allow_indefinite=allow_indefinite)

    @classmethod
    def from_spec(cls, spec: KernelSpec, descriptor: AlgebraDescriptor, allow_indefinite: bool = False) -> "AKernel":
        terms = []
        for term in spec.terms:
            if term.coefficient is None:
                coefficient = AlgebraElement.identity(descriptor)
            else:
                coefficient = element_from_payload(term.coefficient, descriptor)
            terms.append((build_base_kernel(term), coefficient))
        return cls(descriptor, spec.input_dim, terms, allow_indefinite=allow_indefinite)

    def spec(self) -> KernelSpec:
        return KernelSpec(
            input_dim=self.input_dim,
            terms=[base.term_spec(coefficient) for base, coefficient in self.terms],
        )

    def key(self) -> tuple:
        return (
            self.descriptor.key(),
            self.input_dim,
            tuple((base.key(), coefficient.coords.tobytes()) for base, coefficient in self.terms),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AKernel):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def points(self, X: np.ndarray) -> np.ndarray:
        """Validate a point set and return it as an (n, p) float array."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.input_dim:
            raise ShapeMismatchException(
                f"Kernel inputs must have dimension {self.input_dim}, got array of shape {X.shape}"
            )
        return X

    def block(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """Coordinates of k(x_i, y_j), shape (n_x, n_y, *coord_shape)."""
        X = self.points(X)
        Y = self.points(Y)
        trailing = (1,) * len(self.descriptor.coord_shape)
        result = np.zeros((X.shape[0], Y.shape[0]) + self.descriptor.coord_shape, dtype=complex)
        for base, coefficient in self.terms:
            values = base.matrix(X, Y).reshape((X.shape[0], Y.shape[0]) + trailing)
            result = result + values * coefficient.coords
        return result

    def __call__(self, x: np.ndarray, y: np.ndarray) -> AlgebraElement:
        return kernel_eval(self, x, y)


def kernel_eval(k: AKernel, x: np.ndarray, y: np.ndarray) -> AlgebraElement:
    """k(x, y) = sum_r a_r kappa_r(x, y)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    return AlgebraElement(k.descriptor, k.block(x[None, :], y[None, :])[0, 0])


@dataclass(frozen=True, eq=False)
class GramBlock:
    """n x n grid of kernel values G_ij = k(x_i, x_j), stored as (n, n, *coord_shape)."""

    descriptor: AlgebraDescriptor
    points: np.ndarray
    coords: np.ndarray

    @property
    def size(self) -> int:
        return int(self.coords.shape[0])

    def element(self, i: int, j: int) -> AlgebraElement:
        return AlgebraElement(self.descriptor, self.coords[i, j])

    def flatten(self) -> np.ndarray:
        """(nN, nN) block matrix whose (i, j) block is R(G_ij)."""
        n = self.size
        size = self.descriptor.representation_size
        blocks = self.descriptor.represent(self.coords)
        return blocks.transpose(0, 2, 1, 3).reshape(n * size, n * size)

    def min_eigenvalue(self) -> float:
        flat = self.flatten()
        try:
            return float(linalg.eigvalsh(0.5 * (flat + flat.conj().T)).min())
        except linalg.LinAlgError as e:
            raise NumericalException(f"Gram eigenvalue computation failed: {e}") from e

    def quadratic_form(self, c: np.ndarray) -> AlgebraElement:
        """sum_ij c_i* G_ij c_j for coefficient coordinates c of shape (n, *coord_shape)."""
        d = self.descriptor
        inner = d.mul_coords(self.coords, np.asarray(c, dtype=complex)[None, :]).sum(axis=1)
        return AlgebraElement(d, d.mul_coords(d.star_coords(c), inner).sum(axis=0))


def gram(k: AKernel, X: np.ndarray, threads: Optional[int] = None) -> GramBlock:
    """
    Assemble the block Gram matrix of ``k`` on ``X``.

    Args:
        k: A-valued kernel
        X: (n, p) points, n >= 1
        threads: Row-assembly workers (default CSTAR_THREADS)

    Returns:
        GramBlock with G_ij = k(x_i, x_j)
    """
    X = k.points(X)
    if X.shape[0] < 1:
        raise ShapeMismatchException("gram needs at least one point")
    rows = parallel_map(lambda i: k.block(X[i:i + 1], X)[0], range(X.shape[0]), threads=threads)
    return GramBlock(k.descriptor, X, np.stack(rows))


def check_pd(G: GramBlock, tol: Optional[float] = None) -> bool:
    """True iff the flattened Gram matrix is Hermitian with minimum eigenvalue >= -tol."""
    if tol is None:
        tol = config.CSTAR_POSITIVITY_TOL
    if tol < 0:
        raise ValueError(f"tol must be >= 0, got {tol}")
    flat = G.flatten()
    scale = max(1.0, float(np.max(np.abs(flat), initial=0.0)))
    if np.max(np.abs(flat - flat.conj().T), initial=0.0) > max(tol, 1e-12 * scale):
        return False
    return G.min_eigenvalue() >= -tol
