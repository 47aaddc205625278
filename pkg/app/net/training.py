"""Full-batch gradient descent and finite-difference gradient checks."""

import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np

from app.net.network import CStarNet

logger = logging.getLogger(__name__)

FD_STEP = 1e-5


@dataclass
class TrainingResult:
    """Trained net, per-step loss trace (loss before each step, then the final loss) and divergence flag."""
    net: CStarNet
    losses: List[float] = field(default_factory=list)
    diverged: bool = False

    @property
    def final_loss(self) -> float:
        return self.losses[-1] if self.losses else float("nan")


def train(
    net: CStarNet,
    X: np.ndarray,
    Y: np.ndarray,
    steps: int,
    step_size: float,
    seed: int,
    shuffle: bool = False,
) -> TrainingResult:
    """
    Gradient descent on the coordinate parameters of ``net`` (grid values or basis coefficients).

    Args:
        net: Network to train (not modified; a copy is trained)
        X: (n, d_0, *coord_shape) inputs
        Y: (n, d_L, *coord_shape) targets
        steps: Number of steps (0 returns an unchanged copy)
        step_size: Gradient step size
        seed: Seed for the optional sample shuffling
        shuffle: Re-order the full batch every step

    Returns:
        TrainingResult; a non-finite loss stops training and sets ``diverged``
    """
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    trained = net.copy()
    rng = np.random.default_rng(seed)
    X = np.asarray(X, dtype=complex)
    Y = np.asarray(Y, dtype=complex)
    result = TrainingResult(net=trained)

    for step in range(steps):
        order = rng.permutation(X.shape[0]) if shuffle else slice(None)
        loss, grads = trained.loss_and_gradients(X[order], Y[order])
        result.losses.append(loss)
        if not np.isfinite(loss):
            logger.warning(f"Training diverged at step {step}: loss={loss}")
            result.diverged = True
            return result
        trained.set_parameters([p - step_size * g for p, g in zip(trained.parameters(), grads)])
        if step % 100 == 0:
            logger.debug(f"step {step}: loss={loss:.6e}")

    final = trained.loss(X, Y)
    result.losses.append(final)
    if not np.isfinite(final):
        logger.warning(f"Training diverged after {steps} steps: loss={final}")
        result.diverged = True
    logger.info(f"Trained {trained.descriptor.kind} net for {steps} steps: final loss={final:.6e}")
    return result


def grad_check(net: CStarNet, X: np.ndarray, Y: np.ndarray, h: float = FD_STEP, floor: float = 1.0) -> float:
    """
    Compare backprop against central differences on every real and imaginary parameter part.

    The error is relative where either gradient exceeds ``floor`` and absolute
    below it.

    Args:
        net: Network to check
        X: Inputs
        Y: Targets
        h: Central-difference step
        floor: Smallest denominator; 1.0 gives the mixed absolute/relative error

    Returns:
        max |analytic - numeric| / max(|analytic|, |numeric|, floor)
    """
    if floor <= 0:
        raise ValueError(f"floor must be > 0, got {floor}")
    _, grads = net.loss_and_gradients(X, Y)
    params = net.parameters()
    probe = net.copy()
    worst = 0.0
    for p, g in zip(params, grads):
        for index in range(p.size):
            original = p.flat[index]
            for unit, analytic in ((1.0, g.flat[index].real), (1j, g.flat[index].imag)):
                p.flat[index] = original + unit * h
                probe.set_parameters(params)
                loss_plus = probe.loss(X, Y)
                p.flat[index] = original - unit * h
                probe.set_parameters(params)
                loss_minus = probe.loss(X, Y)
                p.flat[index] = original
                numeric = (loss_plus - loss_minus) / (2.0 * h)
                error = abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)
                worst = max(worst, error)
    logger.debug(f"grad_check max error {worst:.3e} (floor={floor})")
    return worst
