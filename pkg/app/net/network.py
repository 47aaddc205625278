"""C*-algebra nets: layers of A-valued weights acting on A^d."""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from app.algebras import GridFunctionAlgebra
from app.algebras.base import AlgebraDescriptor
from app.exceptions import DescriptorMismatchException, InvalidDescriptorException, ShapeMismatchException
from app.hilbert_module import ModuleVector
from app.models import LayerPayload, NetPayload
from app.net.activations import Activation, build_activation
from app.net.basis import BasisWeights
from app.net.scalar_net import ScalarNet
from app.serialization import array_to_payload, descriptor_from_spec, descriptor_to_spec, payload_to_array

logger = logging.getLogger(__name__)

MULTIPLY_MODES = ("left", "right")
BIAS_MODES = ("random", "zero", "constant")

ActivationsLike = Union[Sequence[Union[str, Activation]], str, Activation]


@dataclass
class CStarLayer:
    """x -> sigma(W x + b) with W in A^{d_j x d_{j-1}}, b in A^{d_j}.

    ``weights`` has shape (d_j, d_{j-1}, *coord_shape) and ``bias`` (d_j, *coord_shape).
    With ``multiply="right"`` the weights act as x_k W_ik.
    """

    weights: np.ndarray
    bias: np.ndarray
    activation: Activation
    multiply: str = "left"

    def __post_init__(self):
        self.weights = np.array(self.weights, dtype=complex)
        self.bias = np.array(self.bias, dtype=complex)
        self.activation = build_activation(self.activation)
        if self.multiply not in MULTIPLY_MODES:
            raise ValueError(f"multiply must be one of {MULTIPLY_MODES}, got {self.multiply!r}")

    @property
    def input_dim(self) -> int:
        return int(self.weights.shape[1])

    @property
    def output_dim(self) -> int:
        return int(self.weights.shape[0])


def _as_activations(activations: ActivationsLike, depth: int) -> List[Activation]:
    if isinstance(activations, (str, Activation)):
        return [build_activation(activations)] * depth
    activations = [build_activation(a) for a in activations]
    if len(activations) != depth:
        raise ShapeMismatchException(f"{depth} layers need {depth} activations, got {len(activations)}")
    return activations


class CStarNet:
    """Feed-forward network over A^d.

    Parameters are either the raw coordinates of every weight and bias, or,
    for grid-function algebras, the basis coefficients of a ``BasisWeights``
    from which the grid coordinates are derived.
    """

    def __init__(self, descriptor: AlgebraDescriptor, layers: List[CStarLayer], basis: Optional[BasisWeights] = None):
        if not layers:
            raise ShapeMismatchException("A C*-algebra net needs at least one layer")
        self.descriptor = descriptor
        self.layers = layers
        self.basis = basis
        if basis is not None:
            if not isinstance(descriptor, GridFunctionAlgebra):
                raise InvalidDescriptorException("Basis-coefficient weights need a grid_function algebra")
            if basis.grid_size != descriptor.size or len(basis.coefficients) != len(layers):
                raise ShapeMismatchException(
                    f"basis covers {len(basis.coefficients)} layers on {basis.grid_size} grid points; "
                    f"net has {len(layers)} layers on {descriptor.size}"
                )
            self._sync_from_basis()
        self._validate()

    def _validate(self) -> None:
        cs = self.descriptor.coord_shape
        for j, layer in enumerate(self.layers):
            if layer.weights.ndim != 2 + len(cs) or layer.weights.shape[2:] != cs:
                raise ShapeMismatchException(
                    f"layer {j}: weights must have shape (d_j, d_j-1, *{cs}), got {layer.weights.shape}"
                )
            if layer.bias.shape != (layer.output_dim,) + cs:
                raise ShapeMismatchException(
                    f"layer {j}: bias must have shape ({layer.output_dim}, *{cs}), got {layer.bias.shape}"
                )
            if j > 0 and layer.input_dim != self.layers[j - 1].output_dim:
                raise ShapeMismatchException(
                    f"layer {j} expects {layer.input_dim} inputs but layer {j - 1} has {self.layers[j - 1].output_dim} outputs"
                )

    def _sync_from_basis(self) -> None:
        for j, layer in enumerate(self.layers):
            layer.weights, layer.bias = self.basis.layer_weights(j)

    @classmethod
    def initialize(
        cls,
        descriptor: AlgebraDescriptor,
        widths: Sequence[int],
        activations: ActivationsLike,
        seed: int,
        multiply: str = "left",
        bias: str = "random",
        basis_evaluation: Optional[np.ndarray] = None,
    ) -> "CStarNet":
        """
        Seeded initialization: i.i.d. uniform(-1, 1) / sqrt(d_{j-1} m) with real values.

        Args:
            descriptor: Algebra of weights and signals
            widths: [d_0, d_1, ..., d_L]
            activations: One activation for every layer, or one per layer
            seed: Random seed
            multiply: "left" or "right" weight action
            bias: "random", "zero" or "constant" (the same value on every coordinate)
            basis_evaluation: (grid, m) basis matrix; switches to basis-coefficient parameters

        Returns:
            Initialized CStarNet
        """
        if len(widths) < 2 or any(w < 1 for w in widths):
            raise ShapeMismatchException(f"widths must list d_0..d_L (L >= 1), all >= 1, got {list(widths)}")
        if bias not in BIAS_MODES:
            raise ValueError(f"bias must be one of {BIAS_MODES}, got {bias!r}")
        depth = len(widths) - 1
        acts = _as_activations(activations, depth)
        rng = np.random.default_rng(seed)
        cs = descriptor.coord_shape

        if basis_evaluation is not None:
            m = np.asarray(basis_evaluation).shape[1]
            coefficients, biases = [], []
            for j in range(depth):
                din, dout = widths[j], widths[j + 1]
                scale = 1.0 / np.sqrt(din * m)
                coefficients.append(rng.uniform(-1.0, 1.0, (m, dout, din)) * scale)
                biases.append(np.zeros(dout) if bias == "zero" else rng.uniform(-1.0, 1.0, dout) * scale)
            basis = BasisWeights(basis_evaluation, coefficients, biases)
            layers = [
                CStarLayer(np.zeros((widths[j + 1], widths[j]) + cs), np.zeros((widths[j + 1],) + cs), acts[j], multiply)
                for j in range(depth)
            ]
            return cls(descriptor, layers, basis=basis)

        layers = []
        for j in range(depth):
            din, dout = widths[j], widths[j + 1]
            scale = 1.0 / np.sqrt(din * descriptor.coord_size)
            weights = rng.uniform(-1.0, 1.0, (dout, din) + cs) * scale
            if bias == "zero":
                b = np.zeros((dout,) + cs)
            elif bias == "constant":
                b = rng.uniform(-1.0, 1.0, (dout,) + (1,) * len(cs)) * scale * np.ones(cs)
            else:
                b = rng.uniform(-1.0, 1.0, (dout,) + cs) * scale
            layers.append(CStarLayer(weights, b, acts[j], multiply))
        return cls(descriptor, layers)

    @property
    def widths(self) -> List[int]:
        return [self.layers[0].input_dim] + [layer.output_dim for layer in self.layers]

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def activations(self) -> List[Activation]:
        return [layer.activation for layer in self.layers]

    def copy(self) -> "CStarNet":
        layers = [CStarLayer(l.weights.copy(), l.bias.copy(), l.activation, l.multiply) for l in self.layers]
        basis = None
        if self.basis is not None:
            basis = BasisWeights(
                self.basis.evaluation.copy(),
                [c.copy() for c in self.basis.coefficients],
                [b.copy() for b in self.basis.biases],
            )
        return CStarNet(self.descriptor, layers, basis=basis)

    def parameters(self) -> List[np.ndarray]:
        """Trainable arrays: [W_1, b_1, ..., W_L, b_L] or [c_1, bias_1, ..., c_L, bias_L] in basis mode."""
        params = []
        if self.basis is not None:
            for c, b in zip(self.basis.coefficients, self.basis.biases):
                params.extend([c.copy(), b.copy()])
        else:
            for layer in self.layers:
                params.extend([layer.weights.copy(), layer.bias.copy()])
        return params

    def set_parameters(self, params: Sequence[np.ndarray]) -> None:
        current = self.parameters()
        if len(params) != len(current) or any(np.shape(p) != q.shape for p, q in zip(params, current)):
            raise ShapeMismatchException("Parameter list does not match the network structure")
        if self.basis is not None:
            self.basis.coefficients = [np.array(p, dtype=complex) for p in params[0::2]]
            self.basis.biases = [np.array(p, dtype=complex) for p in params[1::2]]
            self._sync_from_basis()
        else:
            for layer, w, b in zip(self.layers, params[0::2], params[1::2]):
                layer.weights = np.array(w, dtype=complex)
                layer.bias = np.array(b, dtype=complex)

    def _affine(self, layer: CStarLayer, x: np.ndarray) -> np.ndarray:
        d = self.descriptor
        if layer.multiply == "left":
            products = d.mul_coords(layer.weights[None], x[:, None])
        else:
            products = d.mul_coords(x[:, None], layer.weights[None])
        return products.sum(axis=2) + layer.bias[None]

    def _check_inputs(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=complex)
        expected = (self.widths[0],) + self.descriptor.coord_shape
        if X.ndim != 1 + len(expected) or X.shape[1:] != expected:
            raise ShapeMismatchException(f"Net inputs must have shape (n, *{expected}), got {X.shape}")
        return X

    def _trace(self, X: np.ndarray) -> Tuple[np.ndarray, List[Tuple[np.ndarray, np.ndarray]]]:
        h = self._check_inputs(X)
        cache = []
        for layer in self.layers:
            pre = self._affine(layer, h)
            cache.append((h, pre))
            h = layer.activation(pre)
        return h, cache

    def forward_batch(self, X: np.ndarray) -> np.ndarray:
        """Outputs (n, d_L, *coord_shape) for inputs (n, d_0, *coord_shape)."""
        return self._trace(X)[0]

    def loss(self, X: np.ndarray, Y: np.ndarray) -> float:
        """(1/n) sum over samples of the squared coordinate error."""
        outputs = self.forward_batch(X)
        return float(np.sum(np.abs(outputs - Y) ** 2) / outputs.shape[0])

    def loss_and_gradients(self, X: np.ndarray, Y: np.ndarray) -> Tuple[float, List[np.ndarray]]:
        """
        Squared loss and its gradients, aligned with ``parameters()``.

        Gradients use the convention g = dL/dRe + i dL/dIm; for a product
        p = a b the pullbacks are g_a = g_p b* and g_b = a* g_p.
        """
        d = self.descriptor
        outputs, cache = self._trace(X)
        Y = np.asarray(Y, dtype=complex)
        if Y.shape != outputs.shape:
            raise ShapeMismatchException(f"Targets must have shape {outputs.shape}, got {Y.shape}")
        n = outputs.shape[0]
        residual = outputs - Y
        loss = float(np.sum(np.abs(residual) ** 2) / n)

        grad = 2.0 * residual / n
        layer_grads = []
        for layer, (h, pre) in zip(reversed(self.layers), reversed(cache)):
            g_pre = layer.activation.backward(pre, grad)
            g_expanded = g_pre[:, :, None]
            h_star = d.star_coords(h)[:, None]
            w_star = d.star_coords(layer.weights)[None]
            if layer.multiply == "left":
                g_weights = d.mul_coords(g_expanded, h_star).sum(axis=0)
                grad = d.mul_coords(w_star, g_expanded).sum(axis=1)
            else:
                g_weights = d.mul_coords(h_star, g_expanded).sum(axis=0)
                grad = d.mul_coords(g_expanded, w_star).sum(axis=1)
            layer_grads.append((g_weights, g_pre.sum(axis=0)))
        layer_grads.reverse()

        grads = []
        for g_weights, g_bias in layer_grads:
            if self.basis is not None:
                grads.extend(self.basis.pullback(g_weights, g_bias))
            else:
                grads.extend([g_weights, g_bias])
        return loss, grads

    def to_payload(self) -> NetPayload:
        layers = []
        for layer in self.layers:
            raw = self.basis is None
            layers.append(LayerPayload(
                activation=layer.activation.spec(),
                multiply=layer.multiply,
                weights=array_to_payload(layer.weights) if raw else None,
                bias=array_to_payload(layer.bias) if raw else None,
            ))
        return NetPayload(
            descriptor=descriptor_to_spec(self.descriptor),
            layers=layers,
            basis=self.basis.to_payload() if self.basis is not None else None,
        )

    @classmethod
    def from_payload(cls, payload: NetPayload) -> "CStarNet":
        descriptor = descriptor_from_spec(payload.descriptor)
        cs = descriptor.coord_shape
        basis = BasisWeights.from_payload(payload.basis) if payload.basis is not None else None
        layers = []
        for j, spec in enumerate(payload.layers):
            if basis is not None:
                dout, din = basis.coefficients[j].shape[1:]
                weights, bias = np.zeros((dout, din) + cs), np.zeros((dout,) + cs)
            elif spec.weights is None or spec.bias is None:
                raise ShapeMismatchException(f"layer {j} has no weights and the model has no basis")
            else:
                weights, bias = payload_to_array(spec.weights), payload_to_array(spec.bias)
            layers.append(CStarLayer(weights, bias, build_activation(spec.activation), spec.multiply))
        return cls(descriptor, layers, basis=basis)


def lift_inputs(descriptor: AlgebraDescriptor, X: np.ndarray) -> np.ndarray:
    """Embed complex inputs (n, d_0) as constants x 1_A, shape (n, d_0, *coord_shape)."""
    X = np.asarray(X, dtype=complex)
    identity = descriptor.identity_coords()
    return X.reshape(X.shape + (1,) * identity.ndim) * identity


def forward(net: CStarNet, x: ModuleVector) -> ModuleVector:
    """f(x) for one module vector."""
    if x.descriptor != net.descriptor:
        raise DescriptorMismatchException("Input vector and net belong to different algebras")
    return ModuleVector(net.descriptor, net.forward_batch(x.coords[None])[0])


def _require_grid(net: CStarNet, z: int) -> None:
    if not isinstance(net.descriptor, GridFunctionAlgebra):
        raise InvalidDescriptorException(f"Slice evaluation needs a grid_function algebra, got {net.descriptor.kind}")
    if not 0 <= z < net.descriptor.size:
        raise ShapeMismatchException(f"grid index {z} outside [0, {net.descriptor.size})")


def instantiate_scalar_net(net: CStarNet, z: int) -> ScalarNet:
    """The slice f_z: ScalarNet with weights W^j(z) and biases b^j(z)."""
    _require_grid(net, z)
    return ScalarNet(
        [layer.weights[..., z] for layer in net.layers],
        [layer.bias[..., z] for layer in net.layers],
        net.activations,
    )


def forward_at(net: CStarNet, x: ModuleVector, z: int) -> np.ndarray:
    """f(x)(z) computed through the slice network at grid index z."""
    _require_grid(net, z)
    if x.descriptor != net.descriptor:
        raise DescriptorMismatchException("Input vector and net belong to different algebras")
    return instantiate_scalar_net(net, z).forward(x.coords[:, z])


def lift_scalar_net(template: ScalarNet, descriptor: AlgebraDescriptor, multiply: str = "left") -> CStarNet:
    """Net with constant weights W 1_A and biases b 1_A."""
    identity = descriptor.identity_coords()
    trailing = (1,) * identity.ndim
    layers = [
        CStarLayer(w.reshape(w.shape + trailing) * identity, b.reshape(b.shape + trailing) * identity, a, multiply)
        for w, b, a in zip(template.weights, template.biases, template.activations)
    ]
    return CStarNet(descriptor, layers)
