"""Measure-averaged nets A_P f = sum_i p_i f_{z_i} and convex optimization over P."""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy.special import softmax

from app.algebras import GridFunctionAlgebra
from app.exceptions import InvalidDescriptorException, ShapeMismatchException
from app.hilbert_module import ModuleVector
from app.models import ProbabilityWeightsPayload
from app.net.network import CStarNet, forward

logger = logging.getLogger(__name__)

SIMPLEX_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ProbabilityWeights:
    """Discrete probability measure on grid indices ``support`` with simplex weights."""

    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        support = np.array(self.support, dtype=int).reshape(-1)
        weights = np.array(self.weights, dtype=float).reshape(-1)
        if support.size < 1 or support.shape != weights.shape:
            raise ShapeMismatchException(
                f"ProbabilityWeights needs one weight per support point, got {support.size} and {weights.size}"
            )
        if np.unique(support).size != support.size:
            raise ValueError("support points must be distinct")
        if np.any(weights < -SIMPLEX_TOL) or abs(weights.sum() - 1.0) > SIMPLEX_TOL:
            raise ValueError(f"weights must lie on the simplex (sum={weights.sum()!r}, min={weights.min()!r})")
        weights = np.clip(weights, 0.0, None)
        support.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def dirac(cls, z: int) -> "ProbabilityWeights":
        return cls(np.array([z]), np.array([1.0]))

    @classmethod
    def uniform(cls, support: Sequence[int]) -> "ProbabilityWeights":
        support = np.asarray(support, dtype=int)
        return cls(support, np.full(support.size, 1.0 / support.size))

    def dense(self, size: int) -> np.ndarray:
        """Weights as a length-``size`` vector over the whole grid."""
        self.check_grid(size)
        full = np.zeros(size)
        full[self.support] = self.weights
        return full

    def check_grid(self, size: int) -> None:
        if self.support.min() < 0 or self.support.max() >= size:
            raise ShapeMismatchException(f"support {self.support.tolist()} is not on a grid of {size} points")

    def to_payload(self) -> ProbabilityWeightsPayload:
        return ProbabilityWeightsPayload(support=self.support.tolist(), weights=self.weights.tolist())

    @classmethod
    def from_payload(cls, payload: ProbabilityWeightsPayload) -> "ProbabilityWeights":
        return cls(np.asarray(payload.support), np.asarray(payload.weights))


def _require_grid(net: CStarNet) -> GridFunctionAlgebra:
    if not isinstance(net.descriptor, GridFunctionAlgebra):
        raise InvalidDescriptorException(f"Averaged nets need a grid_function algebra, got {net.descriptor.kind}")
    return net.descriptor


def average(net: CStarNet, x: ModuleVector, P: ProbabilityWeights) -> np.ndarray:
    """A_P f(x) = sum_i p_i f_{z_i}(x), integrating the slice outputs."""
    descriptor = _require_grid(net)
    P.check_grid(descriptor.size)
    outputs = forward(net, x).coords
    return outputs[:, P.support] @ P.weights


def slice_outputs(net: CStarNet, X: np.ndarray) -> np.ndarray:
    """All slice outputs f_z(x_n), shape (n, d_L, grid)."""
    _require_grid(net)
    return net.forward_batch(X)


def measure_objective(F: np.ndarray, Y: np.ndarray, p: np.ndarray) -> float:
    """(1/n) sum_n |sum_z p_z F[n, :, z] - Y_n|^2 for slice outputs F restricted to the support of p."""
    residual = F @ p - Y
    return float(np.sum(np.abs(residual) ** 2) / F.shape[0])


def convexity_violation(F: np.ndarray, Y: np.ndarray, p: np.ndarray, q: np.ndarray, ts: Sequence[float]) -> float:
    """max_t L(t p + (1 - t) q) - t L(p) - (1 - t) L(q); <= 0 up to rounding for a convex loss."""
    lp = measure_objective(F, Y, p)
    lq = measure_objective(F, Y, q)
    return max(measure_objective(F, Y, t * p + (1 - t) * q) - t * lp - (1 - t) * lq for t in ts)


@dataclass
class MeasureResult:
    """Best measure found, with the objective trace (initial objective first)."""
    weights: ProbabilityWeights
    objective: float
    initial_objective: float
    objectives: List[float] = field(default_factory=list)


def optimize_measure(
    net: CStarNet,
    X: np.ndarray,
    Y: np.ndarray,
    P0: ProbabilityWeights,
    steps: int,
    step_size: Optional[float] = None,
) -> MeasureResult:
    """
    Exponentiated-gradient descent of P -> L(A_P f(x), y) over the simplex on the support of P0.

    Args:
        net: Fixed net over a grid_function algebra
        X: (n, d_0, grid) inputs
        Y: (n, d_L) complex targets
        P0: Initial measure; its support is the optimization domain
        steps: Mirror-descent steps
        step_size: Defaults to 0.5 / max|H_ij| for the loss Hessian H

    Returns:
        MeasureResult with the best iterate (never worse than P0)
    """
    descriptor = _require_grid(net)
    P0.check_grid(descriptor.size)
    F = slice_outputs(net, X)[:, :, P0.support]
    Y = np.asarray(Y, dtype=complex)
    if Y.shape != F.shape[:2]:
        raise ShapeMismatchException(f"Targets must have shape {F.shape[:2]}, got {Y.shape}")
    n = F.shape[0]

    if step_size is None:
        flat = F.reshape(-1, F.shape[2])
        hessian = 2.0 / n * (flat.conj().T @ flat).real
        lipschitz = float(np.max(np.abs(hessian)))
        step_size = 0.5 / lipschitz if lipschitz > 0 else 1.0

    p = P0.weights.copy()
    best_p, best = p.copy(), measure_objective(F, Y, p)
    objectives = [best]
    for step in range(steps):
        residual = F @ p - Y
        gradient = 2.0 / n * np.einsum("nos,no->s", F.conj(), residual).real
        with np.errstate(divide="ignore"):
            p = softmax(np.log(p) - step_size * gradient)
        p = p / p.sum()
        value = measure_objective(F, Y, p)
        objectives.append(value)
        if value < best:
            best_p, best = p.copy(), value
        if step % 200 == 0:
            logger.debug(f"mirror descent step {step}: objective={value:.6e}")

    logger.info(f"Measure optimization: {objectives[0]:.6e} -> {best:.6e} over {steps} steps")
    return MeasureResult(ProbabilityWeights(P0.support, best_p), best, objectives[0], objectives)
