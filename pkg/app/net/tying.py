"""Weight tying: nets over Z = W^K whose parameters are tied through surjective maps onto Omega.

The index set I holds every (j, i, k) of a scalar template (k = d_{j-1} is
the bias). Blocks M_1..M_K partition part of I; all parameters in M_l are
alpha(z_l) for the same coordinate z_l. Unlisted indices (M_0) stay at the
template value. K = N with singleton blocks frees every parameter; K = 0
gives a net constant in z.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np

from app.algebras import GridFunctionAlgebra
from app.config import config
from app.exceptions import InvalidPartitionException, ShapeMismatchException
from app.net.network import CStarLayer, CStarNet
from app.net.scalar_net import ParameterIndex, ScalarNet, parameter_index_set, split_flat

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AlphaMap:
    """Surjection W -> Omega = [-bound, bound].

    identity: z (W = Omega); clamp: clip(shift + scale z); tanh: bound tanh(shift + scale z),
    which reaches the open interval, the endpoints being limits.
    """
    kind: Literal["identity", "clamp", "tanh"] = "identity"
    scale: float = 1.0
    shift: float = 0.0
    bound: float = 10.0

    def __call__(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if self.kind == "identity":
            return z
        t = self.shift + self.scale * z
        if self.kind == "clamp":
            return np.clip(t, -self.bound, self.bound)
        return self.bound * np.tanh(t)


@dataclass
class ParameterMap:
    """Tying partition M_1..M_K of the index set of a scalar net with widths ``widths``."""

    widths: List[int]
    blocks: List[List[ParameterIndex]]
    alphas: Dict[ParameterIndex, AlphaMap] = field(default_factory=dict)
    bound: float = field(default_factory=lambda: config.CSTAR_OMEGA_BOUND)

    def __post_init__(self):
        self.widths = [int(w) for w in self.widths]
        self.blocks = [[tuple(int(v) for v in index) for index in block] for block in self.blocks]
        valid = set(parameter_index_set(self.widths))
        seen = set()
        for l, block in enumerate(self.blocks):
            if not block:
                raise InvalidPartitionException(f"block M_{l + 1} is empty")
            for index in block:
                if index not in valid:
                    raise InvalidPartitionException(f"index {index} is not a parameter of a net with widths {self.widths}")
                if index in seen:
                    raise InvalidPartitionException(f"index {index} appears in more than one block")
                seen.add(index)
        for index in self.alphas:
            if index not in seen:
                raise InvalidPartitionException(f"alpha map given for untied index {index}")

    @classmethod
    def fully_free(cls, widths: Sequence[int], bound: Optional[float] = None, kind: str = "identity") -> "ParameterMap":
        """K = N: every parameter has its own coordinate."""
        bound = config.CSTAR_OMEGA_BOUND if bound is None else bound
        indices = parameter_index_set(widths)
        alphas = {} if kind == "identity" else {index: AlphaMap(kind, bound=bound) for index in indices}
        return cls(list(widths), [[index] for index in indices], alphas, bound)

    @classmethod
    def fully_tied(cls, widths: Sequence[int], alpha: Optional[AlphaMap] = None, bound: Optional[float] = None) -> "ParameterMap":
        """K = 1: every parameter follows one coordinate."""
        bound = config.CSTAR_OMEGA_BOUND if bound is None else bound
        indices = parameter_index_set(widths)
        alphas = {} if alpha is None else {index: alpha for index in indices}
        return cls(list(widths), [indices], alphas, bound)

    @classmethod
    def fixed(cls, widths: Sequence[int], bound: Optional[float] = None) -> "ParameterMap":
        """K = 0: no free coordinate."""
        bound = config.CSTAR_OMEGA_BOUND if bound is None else bound
        return cls(list(widths), [], {}, bound)

    @property
    def K(self) -> int:
        return len(self.blocks)

    @property
    def N(self) -> int:
        return len(parameter_index_set(self.widths))

    @property
    def fixed_indices(self) -> List[ParameterIndex]:
        """M_0: indices held at the template value."""
        tied = {index for block in self.blocks for index in block}
        return [index for index in parameter_index_set(self.widths) if index not in tied]

    def alpha(self, index: ParameterIndex) -> AlphaMap:
        return self.alphas.get(index, AlphaMap("identity", bound=self.bound))

    def parameters_at(self, template: ScalarNet, z_points: np.ndarray) -> np.ndarray:
        """Flat parameters (m, N) of the nets at the rows of ``z_points`` (m, K)."""
        z_points = np.asarray(z_points, dtype=float)
        if z_points.ndim != 2 or z_points.shape[1] != self.K:
            raise ShapeMismatchException(f"z points must have shape (m, K={self.K}), got {z_points.shape}")
        if template.widths != self.widths:
            raise InvalidPartitionException(f"template widths {template.widths} differ from map widths {self.widths}")
        position = {index: n for n, index in enumerate(parameter_index_set(self.widths))}
        values = np.tile(template.flat_parameters(), (z_points.shape[0], 1))
        for l, block in enumerate(self.blocks):
            for index in block:
                values[:, position[index]] = self.alpha(index)(z_points[:, l])
        return values


def default_tying_grid(
    K: int,
    bound: float,
    resolution: int = 5,
    seed: int = 0,
    max_grid: Optional[int] = None,
) -> np.ndarray:
    """Points of W^K: a product grid on [-bound, bound] if it fits ``max_grid``, else a seeded sample."""
    max_grid = config.CSTAR_MAX_GRID if max_grid is None else max_grid
    if K == 0:
        return np.zeros((1, 0))
    if resolution ** K <= max_grid:
        axis = np.linspace(-bound, bound, resolution)
        return np.array(list(itertools.product(axis, repeat=K)))
    rng = np.random.default_rng(seed)
    return rng.uniform(-bound, bound, (max_grid, K))


def build_tied_net(
    pm: ParameterMap,
    template: ScalarNet,
    z_points: Optional[np.ndarray] = None,
    resolution: int = 5,
    seed: int = 0,
) -> CStarNet:
    """
    Net over the grid ``z_points`` of W^K whose slice at z has the tied parameters.

    Args:
        pm: Parameter map (partition and alpha maps)
        template: Scalar net supplying the widths, activations and the M_0 values
        z_points: (m, K) grid of W^K; defaults to ``default_tying_grid``
        resolution: Points per axis of the default product grid
        seed: Seed for the default sampled grid

    Returns:
        CStarNet over a grid_function algebra on ``z_points``
    """
    if z_points is None:
        z_points = default_tying_grid(pm.K, pm.bound, resolution, seed)
    values = pm.parameters_at(template, z_points)
    descriptor = GridFunctionAlgebra(np.asarray(z_points, dtype=float).reshape(values.shape[0], pm.K))
    layers = [
        CStarLayer(np.moveaxis(weights, 0, -1), np.moveaxis(biases, 0, -1), activation)
        for (weights, biases), activation in zip(split_flat(pm.widths, values), template.activations)
    ]
    logger.debug(f"Built tied net: K={pm.K} N={pm.N} grid={values.shape[0]}")
    return CStarNet(descriptor, layers)


def realize_scalar_net(template: ScalarNet, bound: Optional[float] = None) -> Tuple[CStarNet, int]:
    """
    Realize an Omega-valued scalar net as a slice of the fully free tied net.

    Returns:
        (net, z) with instantiate_scalar_net(net, z) equal to ``template``

    Raises:
        InvalidPartitionException: If a parameter is complex or outside [-bound, bound]
    """
    bound = config.CSTAR_OMEGA_BOUND if bound is None else bound
    values = template.flat_parameters()
    if np.any(values.imag != 0) or np.any(np.abs(values.real) > bound):
        raise InvalidPartitionException(f"template parameters must be real and lie in [-{bound}, {bound}]")
    pm = ParameterMap.fully_free(template.widths, bound)
    return build_tied_net(pm, template, values.real[None, :]), 0
