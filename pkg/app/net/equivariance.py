"""Right-translation equivariance of group-algebra nets.

Left multiplication commutes with right translation (rho_g x)(h) = x(hg),
so nets with left-acting weights, coordinatewise activations and
translation-invariant (constant) biases satisfy f(rho_g x) = rho_g f(x).
"""

import logging
from typing import Optional, Sequence, Union

import numpy as np

from app.algebras import GroupAlgebra
from app.exceptions import InvalidDescriptorException
from app.net.activations import Activation
from app.net.network import CStarLayer, CStarNet

logger = logging.getLogger(__name__)


def _require_group(net: CStarNet) -> GroupAlgebra:
    if not isinstance(net.descriptor, GroupAlgebra):
        raise InvalidDescriptorException(f"Equivariance needs a group_algebra net, got {net.descriptor.kind}")
    return net.descriptor


def build_group_net(
    descriptor: GroupAlgebra,
    widths: Sequence[int],
    activations: Union[str, Activation, Sequence[Union[str, Activation]]],
    seed: int,
    multiply: str = "left",
) -> CStarNet:
    """Seeded group net with constant biases."""
    return CStarNet.initialize(descriptor, widths, activations, seed, multiply=multiply, bias="constant")


def identity_group_net(descriptor: GroupAlgebra, width: int) -> CStarNet:
    """One layer with W = delta_e on the diagonal, zero bias and identity activation: f(x) = x."""
    weights = np.zeros((width, width) + descriptor.coord_shape, dtype=complex)
    for i in range(width):
        weights[i, i] = descriptor.identity_coords()
    return CStarNet(descriptor, [CStarLayer(weights, np.zeros((width,) + descriptor.coord_shape), "identity")])


def equivariance_check(net: CStarNet, trials: int, seed: int, inputs: Optional[np.ndarray] = None) -> float:
    """
    max over random inputs and all g of max |f(rho_g x) - rho_g f(x)|.

    Args:
        net: Net over a group_algebra
        trials: Number of random inputs (ignored if ``inputs`` is given)
        seed: Seed for the random complex inputs
        inputs: Optional (n, d_0, |G|) inputs

    Returns:
        Maximum absolute coordinate error
    """
    descriptor = _require_group(net)
    if inputs is None:
        rng = np.random.default_rng(seed)
        shape = (trials, net.widths[0], descriptor.order)
        inputs = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    outputs = net.forward_batch(inputs)
    worst = 0.0
    for g in range(descriptor.order):
        translated = net.forward_batch(descriptor.right_translate(inputs, g))
        error = float(np.max(np.abs(translated - descriptor.right_translate(outputs, g))))
        worst = max(worst, error)
    logger.debug(f"equivariance error over {descriptor.order} translations: {worst:.3e}")
    return worst
