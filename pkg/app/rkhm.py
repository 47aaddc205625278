"""Reproducing kernel Hilbert C*-modules: expansions, ridge regression, mean embeddings and MMD.

Elements of the RKHM are finite expansions v = sum_i phi(x_i) c_i with
A-valued coefficients. The reproducing property <phi(x), v> = v(x) makes
every inner product a double sum of kernel values.
"""

import logging
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from app.algebra import AlgebraElement
from app.algebras.base import AlgebraDescriptor
from app.exceptions import DescriptorMismatchException, NumericalException, ShapeMismatchException
from app.kernels import AKernel, gram
from app.models import RegressorPayload
from app.parallel import parallel_map
from app.serialization import descriptor_from_spec, descriptor_to_spec, element_from_payload, element_to_payload

logger = logging.getLogger(__name__)

ElementsLike = Union[Sequence[AlgebraElement], np.ndarray]


def _coefficient_coords(values: ElementsLike, descriptor: AlgebraDescriptor) -> np.ndarray:
    """Stack elements (or validate an array) into shape (n, *coord_shape)."""
    if isinstance(values, np.ndarray):
        coords = np.array(values, dtype=complex)
    else:
        for value in values:
            if value.descriptor != descriptor:
                raise DescriptorMismatchException(f"Element of {value.descriptor!r} used with {descriptor!r}")
        coords = np.array([value.coords for value in values], dtype=complex)
    if coords.ndim != 1 + len(descriptor.coord_shape) or coords.shape[1:] != descriptor.coord_shape:
        raise ShapeMismatchException(
            f"Expected coefficient array of shape (n, *{descriptor.coord_shape}), got {coords.shape}"
        )
    return coords


@dataclass(frozen=True, eq=False)
class KernelExpansion:
    """v = sum_i phi(x_i) c_i, with points (n, p) and coefficients (n, *coord_shape)."""

    kernel: AKernel
    points: np.ndarray
    coefficients: np.ndarray

    def __post_init__(self):
        points = self.kernel.points(self.points)
        coefficients = _coefficient_coords(self.coefficients, self.kernel.descriptor)
        if coefficients.shape[0] != points.shape[0]:
            raise ShapeMismatchException(
                f"{points.shape[0]} points but {coefficients.shape[0]} coefficients in kernel expansion"
            )
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "coefficients", coefficients)

    @classmethod
    def feature_map(cls, kernel: AKernel, x: np.ndarray) -> "KernelExpansion":
        """phi(x) = k(., x) as the one-term expansion phi(x) 1_A."""
        identity = kernel.descriptor.identity_coords()
        return cls(kernel, np.asarray(x, dtype=float).reshape(1, -1), identity[None])

    @property
    def descriptor(self) -> AlgebraDescriptor:
        return self.kernel.descriptor

    def _check(self, other: "KernelExpansion") -> None:
        if self.kernel != other.kernel:
            raise DescriptorMismatchException("Kernel expansions belong to different RKHMs")

    def __add__(self, other: "KernelExpansion") -> "KernelExpansion":
        self._check(other)
        return KernelExpansion(
            self.kernel,
            np.concatenate([self.points, other.points]),
            np.concatenate([self.coefficients, other.coefficients]),
        )

    def __neg__(self) -> "KernelExpansion":
        return KernelExpansion(self.kernel, self.points, -self.coefficients)

    def __sub__(self, other: "KernelExpansion") -> "KernelExpansion":
        return self + (-other)

    def right_mul(self, c: AlgebraElement) -> "KernelExpansion":
        if c.descriptor != self.descriptor:
            raise DescriptorMismatchException("Right multiplier belongs to a different algebra")
        return KernelExpansion(self.kernel, self.points, self.descriptor.mul_coords(self.coefficients, c.coords))

    def __mul__(self, c: AlgebraElement) -> "KernelExpansion":
        return self.right_mul(c)

    def evaluate_many(self, X: np.ndarray) -> np.ndarray:
        """v(x) for each row of X, shape (n_x, *coord_shape)."""
        block = self.kernel.block(X, self.points)
        return self.descriptor.mul_coords(block, self.coefficients[None]).sum(axis=1)

    def evaluate(self, x: np.ndarray) -> AlgebraElement:
        """v(x) = sum_i k(x, x_i) c_i."""
        x = np.asarray(x, dtype=float).reshape(1, -1)
        return AlgebraElement(self.descriptor, self.evaluate_many(x)[0])

    def inner(self, other: "KernelExpansion") -> AlgebraElement:
        """<u, v> = sum_ij u_i* k(x_i, y_j) v_j."""
        self._check(other)
        d = self.descriptor
        weighted = d.mul_coords(self.kernel.block(self.points, other.points), other.coefficients[None]).sum(axis=1)
        return AlgebraElement(d, d.mul_coords(d.star_coords(self.coefficients), weighted).sum(axis=0))

    def norm(self) -> float:
        """RKHM norm ||<v, v>||^{1/2}."""
        return float(np.sqrt(max(self.inner(self).norm(), 0.0)))


@dataclass(frozen=True, eq=False)
class DiscreteAMeasure:
    """Finitely supported A-valued measure sum_i mu_i delta_{x_i}."""

    descriptor: AlgebraDescriptor
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        if points.ndim == 1:
            points = points[:, None]
        weights = _coefficient_coords(self.weights, self.descriptor)
        if points.ndim != 2 or points.shape[0] != weights.shape[0] or points.shape[0] < 1:
            raise ShapeMismatchException(
                f"Measure needs one weight per support point, got points {points.shape} and weights {weights.shape}"
            )
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def dirac(cls, descriptor: AlgebraDescriptor, x: np.ndarray, weight: Optional[AlgebraElement] = None) -> "DiscreteAMeasure":
        coords = descriptor.identity_coords() if weight is None else weight.coords
        return cls(descriptor, np.asarray(x, dtype=float).reshape(1, -1), np.asarray(coords)[None])

    def __add__(self, other: "DiscreteAMeasure") -> "DiscreteAMeasure":
        if self.descriptor != other.descriptor:
            raise DescriptorMismatchException("Measures take values in different algebras")
        return DiscreteAMeasure(
            self.descriptor,
            np.concatenate([self.points, other.points]),
            np.concatenate([self.weights, other.weights]),
        )


def embed(mu: DiscreteAMeasure, k: AKernel) -> KernelExpansion:
    """Kernel mean embedding sum_i phi(x_i) mu_i."""
    if mu.descriptor != k.descriptor:
        raise DescriptorMismatchException("Measure and kernel take values in different algebras")
    return KernelExpansion(k, mu.points, mu.weights)


def mmd(k: AKernel, mu: DiscreteAMeasure, nu: DiscreteAMeasure) -> Tuple[AlgebraElement, float]:
    """
    A-valued squared MMD and its real norm.

    Returns:
        (<E mu - E nu, E mu - E nu>, ||E mu - E nu||)
    """
    difference = embed(mu, k) - embed(nu, k)
    value = difference.inner(difference)
    return value, float(np.sqrt(max(value.norm(), 0.0)))


def _solve(system: np.ndarray, rhs: np.ndarray, ridge: float, interpolation: bool) -> np.ndarray:
    system = system + ridge * np.eye(system.shape[0])
    if ridge > 0:
        try:
            return linalg.solve(system, rhs)
        except linalg.LinAlgError as e:
            raise NumericalException(f"Ridge system is singular at lambda={ridge}: {e}") from e

    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", linalg.LinAlgWarning)
            return linalg.solve(system, rhs)
    except (linalg.LinAlgError, linalg.LinAlgWarning) as e:
        logger.warning(f"Interpolation system is ill-conditioned ({e}); falling back to pseudo-inverse")
    try:
        return linalg.pinvh(0.5 * (system + system.conj().T)) @ rhs
    except linalg.LinAlgError as e:
        raise NumericalException(f"Pseudo-inverse failed: {e}") from e


@dataclass(frozen=True, eq=False)
class RkhmRegressor:
    """Fitted ridge regressor v = sum_i phi(x_i) c_i."""

    kernel: AKernel
    points: np.ndarray
    coefficients: np.ndarray
    ridge: float
    interpolation: bool = False

    @property
    def descriptor(self) -> AlgebraDescriptor:
        return self.kernel.descriptor

    def expansion(self) -> KernelExpansion:
        return KernelExpansion(self.kernel, self.points, self.coefficients)

    def predict_many(self, X: np.ndarray) -> np.ndarray:
        return self.expansion().evaluate_many(X)

    def system_residual(self, targets: ElementsLike) -> float:
        """max |(G + lambda) c - Y| over all coordinates."""
        targets = _coefficient_coords(targets, self.descriptor)
        fitted = self.predict_many(self.points) + self.ridge * self.coefficients
        return float(np.max(np.abs(fitted - targets)))

    def objective(self, targets: ElementsLike, coefficients: Optional[np.ndarray] = None) -> float:
        """sum_i ||R(v(x_i) - Y_i)||_F^2 + lambda tr R(<c, G c>) for the given (default fitted) coefficients."""
        d = self.descriptor
        targets = _coefficient_coords(targets, d)
        c = self.coefficients if coefficients is None else _coefficient_coords(coefficients, d)
        candidate = KernelExpansion(self.kernel, self.points, c)
        residual = d.represent(candidate.evaluate_many(self.points) - targets)
        penalty = np.trace(d.represent(candidate.inner(candidate).coords)).real
        return float(np.sum(np.abs(residual) ** 2) + self.ridge * penalty)

    def to_payload(self) -> RegressorPayload:
        return RegressorPayload(
            descriptor=descriptor_to_spec(self.descriptor),
            kernel=self.kernel.spec(),
            points=self.points.tolist(),
            coefficients=[element_to_payload(AlgebraElement(self.descriptor, c)) for c in self.coefficients],
            ridge=self.ridge,
            interpolation=self.interpolation,
        )

    @classmethod
    def from_payload(cls, payload: RegressorPayload) -> "RkhmRegressor":
        descriptor = descriptor_from_spec(payload.descriptor)
        kernel = AKernel.from_spec(payload.kernel, descriptor)
        coefficients = np.array([element_from_payload(c, descriptor).coords for c in payload.coefficients])
        points = np.asarray(payload.points, dtype=float)
        return cls(kernel, points, coefficients, payload.ridge, payload.interpolation)


def fit_krr(
    k: AKernel,
    X: np.ndarray,
    Y: ElementsLike,
    ridge: float,
    interpolation: bool = False,
    threads: Optional[int] = None,
) -> RkhmRegressor:
    """
    RKHM kernel ridge regression: solve (G + lambda 1_A) c = Y in A^n.

    The module system is flattened through the regular representation; for
    grid-function algebras it splits into one n x n solve per grid point.

    Args:
        k: A-valued kernel
        X: (n, p) training inputs
        Y: n target elements (or an (n, *coord_shape) array)
        ridge: lambda > 0 (0 only with ``interpolation``)
        interpolation: Allow lambda = 0 with a pseudo-inverse fallback
        threads: Workers for per-grid-point solves

    Returns:
        Fitted RkhmRegressor

    Raises:
        ValueError: If lambda is invalid
        NumericalException: If the system cannot be solved
    """
    X = k.points(X)
    descriptor = k.descriptor
    targets = _coefficient_coords(Y, descriptor)
    n = X.shape[0]
    if targets.shape[0] != n:
        raise ShapeMismatchException(f"{n} inputs but {targets.shape[0]} targets")
    if ridge < 0 or (ridge == 0 and not interpolation):
        raise ValueError(f"ridge must be > 0 (or 0 with interpolation=True), got {ridge}")

    G = gram(k, X, threads=threads)
    if descriptor.kind == "grid_function":
        columns = parallel_map(
            lambda z: _solve(G.coords[:, :, z], targets[:, z], ridge, interpolation),
            range(descriptor.coord_shape[0]),
            threads=threads,
        )
        coefficients = np.stack(columns, axis=-1)
    else:
        size = descriptor.representation_size
        rhs = descriptor.represent(targets).reshape(n * size, size)
        solution = _solve(G.flatten(), rhs, ridge, interpolation)
        coefficients = descriptor.from_representation(solution.reshape(n, size, size))

    logger.info(f"Fitted RKHM ridge regressor: kind={descriptor.kind} n={n} lambda={ridge}")
    return RkhmRegressor(k, X, coefficients, float(ridge), interpolation)


def predict(reg: RkhmRegressor, x: np.ndarray) -> AlgebraElement:
    """v(x) = sum_i k(x, x_i) c_i."""
    return reg.expansion().evaluate(x)
