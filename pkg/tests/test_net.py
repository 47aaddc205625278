"""Tests for the C*-algebra net: activations, scalar slices, forward pass, training and gradients."""

import numpy as np
import pytest

from app.algebras import DenseMatrixAlgebra, GridFunctionAlgebra, ScalarAlgebra, cyclic_group
from app.exceptions import InvalidDescriptorException, ShapeMismatchException
from app.hilbert_module import ModuleVector
from app.net import (
    BasisWeights,
    CStarLayer,
    CStarNet,
    Linear,
    ScalarNet,
    build_activation,
    forward,
    forward_at,
    grad_check,
    instantiate_scalar_net,
    lift_inputs,
    lift_scalar_net,
    monomial_evaluation,
    parameter_index_set,
    train,
)


def random_inputs(descriptor, rng, n, width):
    shape = (n, width) + descriptor.coord_shape
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def away_from_kinks(net, X, margin=1e-3):
    _, cache = net._trace(X)
    return all(np.min(np.abs(pre.real)) > margin and np.min(np.abs(pre.imag)) > margin for _, pre in cache)


class TestActivations:
    """Tests for build_activation and the split-complex activations."""

    def test_unknown(self):
        with pytest.raises(ValueError, match="Unknown activation"):
            build_activation("softplus")

    def test_split_complex(self):
        relu = build_activation("relu")
        assert np.allclose(relu(np.array([-1 + 2j, 3 - 4j])), [2j, 3])

    def test_linear_slope(self):
        linear = build_activation("linear", slope=0.5)
        assert isinstance(linear, Linear)
        assert np.allclose(linear(np.array([2 - 4j])), [1 - 2j])
        assert linear.spec().slope == 0.5
        assert linear.is_linear

    def test_tanh_backward(self):
        tanh = build_activation("tanh")
        pre = np.array([0.3 - 0.2j])
        grad = np.array([1.0 + 1.0j])
        expected = (1 - np.tanh(0.3) ** 2) + 1j * (1 - np.tanh(-0.2) ** 2)
        assert np.allclose(tanh.backward(pre, grad), [expected])


class TestScalarNet:
    """Tests for ScalarNet and the parameter index set."""

    def test_index_set_size(self):
        assert len(parameter_index_set([2, 3, 1])) == 3 * 3 + 1 * 4

    def test_flat_round_trip(self):
        net = ScalarNet.random([2, 3, 1], "tanh", seed=3)
        rebuilt = ScalarNet.from_flat(net.widths, net.flat_parameters(), "tanh")
        assert rebuilt.allclose(net, atol=0.0)

    def test_random_bound(self):
        net = ScalarNet.random([2, 2], "relu", seed=1, bound=0.25)
        assert net.max_abs_parameter() <= 0.25
        assert net.is_real()

    def test_inconsistent_layers(self):
        with pytest.raises(ShapeMismatchException):
            ScalarNet([np.zeros((2, 3)), np.zeros((1, 4))], [np.zeros(2), np.zeros(1)], ["tanh", "tanh"])


class TestForward:
    """Tests for forward and forward_batch."""

    def test_identity_net(self, descriptor, rng):
        width = 3
        weights = np.zeros((width, width) + descriptor.coord_shape, dtype=complex)
        for i in range(width):
            weights[i, i] = descriptor.identity_coords()
        net = CStarNet(descriptor, [CStarLayer(weights, np.zeros((width,) + descriptor.coord_shape), "identity")])
        x = ModuleVector(descriptor, random_inputs(descriptor, rng, 1, width)[0])
        assert np.allclose(forward(net, x).coords, x.coords)

    def test_scalar_dense_layer(self, rng):
        W = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
        b = rng.standard_normal(2)
        net = CStarNet(ScalarAlgebra(), [CStarLayer(W, b, "tanh")])
        x = rng.standard_normal(3)
        pre = W @ x + b
        expected = np.tanh(pre.real) + 1j * np.tanh(pre.imag)
        assert np.allclose(forward(net, ModuleVector(ScalarAlgebra(), x)).coords, expected)

    def test_grid_equals_slices(self, rng):
        descriptor = GridFunctionAlgebra.uniform(4)
        net = CStarNet.initialize(descriptor, [2, 3, 2], "tanh", seed=5)
        X = random_inputs(descriptor, rng, 6, 2)
        outputs = net.forward_batch(X)
        for z in range(4):
            assert np.allclose(instantiate_scalar_net(net, z).forward(X[:, :, z]), outputs[:, :, z], atol=1e-12)

    def test_matrix_net_is_matrix_product(self, rng):
        descriptor = DenseMatrixAlgebra(2)
        net = CStarNet.initialize(descriptor, [2, 1], "identity", seed=2)
        X = random_inputs(descriptor, rng, 1, 2)
        layer = net.layers[0]
        expected = layer.weights[0, 0] @ X[0, 0] + layer.weights[0, 1] @ X[0, 1] + layer.bias[0]
        assert np.allclose(net.forward_batch(X)[0, 0], expected)

    def test_right_multiplication(self, rng):
        descriptor = DenseMatrixAlgebra(2)
        net = CStarNet.initialize(descriptor, [1, 1], "identity", seed=2, multiply="right", bias="zero")
        X = random_inputs(descriptor, rng, 1, 1)
        assert np.allclose(net.forward_batch(X)[0, 0], X[0, 0] @ net.layers[0].weights[0, 0])

    def test_wrong_input_shape(self, rng):
        net = CStarNet.initialize(DenseMatrixAlgebra(2), [2, 1], "tanh", seed=0)
        with pytest.raises(ShapeMismatchException, match="Net inputs"):
            net.forward_batch(np.zeros((3, 3, 2, 2)))

    def test_initialize_is_deterministic(self):
        a = CStarNet.initialize(cyclic_group(3), [2, 2, 1], "tanh", seed=9)
        b = CStarNet.initialize(cyclic_group(3), [2, 2, 1], "tanh", seed=9)
        for p, q in zip(a.parameters(), b.parameters()):
            assert np.array_equal(p, q)

    def test_unknown_bias_mode(self):
        with pytest.raises(ValueError, match="bias"):
            CStarNet.initialize(ScalarAlgebra(), [1, 1], "tanh", seed=0, bias="learned")


class TestForwardAt:
    """Tests for forward_at and instantiate_scalar_net."""

    def test_constant_weights(self, rng):
        descriptor = GridFunctionAlgebra.uniform(5)
        template = ScalarNet.random([2, 3, 1], "tanh", seed=4)
        net = lift_scalar_net(template, descriptor)
        x = ModuleVector.constant(descriptor, rng.standard_normal(2))
        values = [forward_at(net, x, z) for z in range(5)]
        for value in values[1:]:
            assert np.allclose(value, values[0], atol=1e-12)

    def test_matches_forward_slice(self, rng):
        descriptor = GridFunctionAlgebra.uniform(3)
        net = CStarNet.initialize(descriptor, [2, 2, 2], "relu", seed=1)
        x = ModuleVector(descriptor, random_inputs(descriptor, rng, 1, 2)[0])
        full = forward(net, x).coords
        for z in range(3):
            assert np.max(np.abs(forward_at(net, x, z) - full[:, z])) <= 1e-12

    def test_requires_grid(self):
        net = CStarNet.initialize(DenseMatrixAlgebra(2), [1, 1], "tanh", seed=0)
        with pytest.raises(InvalidDescriptorException, match="grid_function"):
            instantiate_scalar_net(net, 0)

    def test_grid_index_range(self):
        net = CStarNet.initialize(GridFunctionAlgebra.uniform(2), [1, 1], "tanh", seed=0)
        with pytest.raises(ShapeMismatchException, match="outside"):
            instantiate_scalar_net(net, 2)


class TestBasisWeights:
    """Tests for the basis-coefficient parameterization."""

    def test_monomials(self):
        evaluation = monomial_evaluation(np.array([0.0, 0.5, 1.0]), 3)
        assert np.allclose(evaluation, [[1, 0, 0], [1, 0.5, 0.25], [1, 1, 1]])

    def test_rank_deficient(self):
        evaluation = np.ones((4, 2))
        with pytest.raises(InvalidDescriptorException, match="full column rank"):
            BasisWeights(evaluation, [np.zeros((2, 1, 1))], [np.zeros(1)])

    def test_grid_weights_follow_coefficients(self):
        descriptor = GridFunctionAlgebra.uniform(4)
        evaluation = monomial_evaluation(descriptor.points, 2)
        net = CStarNet.initialize(descriptor, [2, 1], "identity", seed=3, basis_evaluation=evaluation)
        c = net.basis.coefficients[0]
        z = descriptor.points[:, 0]
        expected = c[0][..., None] + c[1][..., None] * z
        assert np.allclose(net.layers[0].weights, expected)
        assert np.allclose(net.layers[0].bias, net.basis.biases[0][:, None] * np.ones(4))

    def test_basis_needs_grid(self):
        layer = CStarLayer(np.zeros((1, 1, 2, 2)), np.zeros((1, 2, 2)), "identity")
        basis = BasisWeights(np.eye(2), [np.zeros((2, 1, 1))], [np.zeros(1)])
        with pytest.raises(InvalidDescriptorException, match="grid_function"):
            CStarNet(DenseMatrixAlgebra(2), [layer], basis=basis)


class TestPayload:
    """Tests for net model files."""

    def test_round_trip(self, descriptor, rng):
        net = CStarNet.initialize(descriptor, [2, 3, 1], ["tanh", Linear(0.5)], seed=4)
        restored = CStarNet.from_payload(net.to_payload())
        X = random_inputs(descriptor, rng, 3, 2)
        assert np.array_equal(restored.forward_batch(X), net.forward_batch(X))
        assert [a.name for a in restored.activations] == ["tanh", "linear"]

    def test_basis_round_trip(self, rng):
        descriptor = GridFunctionAlgebra.uniform(5)
        evaluation = monomial_evaluation(descriptor.points, 3)
        net = CStarNet.initialize(descriptor, [1, 2, 1], "tanh", seed=4, basis_evaluation=evaluation)
        restored = CStarNet.from_payload(net.to_payload())
        assert restored.basis is not None
        X = random_inputs(descriptor, rng, 2, 1)
        assert np.allclose(restored.forward_batch(X), net.forward_batch(X), atol=1e-14)


class TestTrain:
    """Tests for train."""

    def test_zero_steps(self, rng):
        net = CStarNet.initialize(DenseMatrixAlgebra(2), [2, 1], "tanh", seed=0)
        X = random_inputs(net.descriptor, rng, 4, 2)
        Y = random_inputs(net.descriptor, rng, 4, 1)
        result = train(net, X, Y, steps=0, step_size=0.1, seed=0)
        for p, q in zip(result.net.parameters(), net.parameters()):
            assert np.array_equal(p, q)
        assert result.losses == [net.loss(X, Y)]

    def test_does_not_modify_input_net(self, rng):
        net = CStarNet.initialize(ScalarAlgebra(), [2, 1], "tanh", seed=0)
        before = [p.copy() for p in net.parameters()]
        X = random_inputs(net.descriptor, rng, 4, 2)
        train(net, X, random_inputs(net.descriptor, rng, 4, 1), steps=5, step_size=0.1, seed=0)
        for p, q in zip(net.parameters(), before):
            assert np.array_equal(p, q)

    def test_linear_regression_converges_to_least_squares(self, rng):
        inputs = rng.uniform(-1.0, 1.0, (20, 2))
        targets = inputs @ np.array([1.5, -0.7]) + 0.3 + 0.05 * rng.standard_normal(20)
        net = CStarNet.initialize(ScalarAlgebra(), [2, 1], "identity", seed=1)
        result = train(net, lift_inputs(ScalarAlgebra(), inputs), targets[:, None], steps=2000, step_size=0.2, seed=0)
        design = np.hstack([inputs, np.ones((20, 1))])
        solution, *_ = np.linalg.lstsq(design, targets, rcond=None)
        layer = result.net.layers[0]
        assert np.allclose(layer.weights[0], solution[:2], atol=1e-4)
        assert np.allclose(layer.bias[0], solution[2], atol=1e-4)
        assert result.losses[-1] < result.losses[0]

    def test_grid_net_trains_slices_independently(self, rng):
        descriptor = GridFunctionAlgebra.uniform(3)
        net = CStarNet.initialize(descriptor, [2, 2, 1], "tanh", seed=2)
        X = lift_inputs(descriptor, rng.standard_normal((5, 2)))
        Y = rng.standard_normal((5, 1, 3))
        trained = train(net, X, Y, steps=25, step_size=0.1, seed=0).net
        for z in range(3):
            scalar = lift_scalar_net(instantiate_scalar_net(net, z), ScalarAlgebra())
            slice_trained = train(scalar, X[:, :, z], Y[:, :, z], steps=25, step_size=0.1, seed=0).net
            for grid_layer, scalar_layer in zip(trained.layers, slice_trained.layers):
                assert np.allclose(grid_layer.weights[..., z], scalar_layer.weights, atol=1e-12)
                assert np.allclose(grid_layer.bias[..., z], scalar_layer.bias, atol=1e-12)

    def test_divergence_is_flagged(self, rng):
        net = CStarNet.initialize(ScalarAlgebra(), [1, 1], "identity", seed=0)
        X = lift_inputs(ScalarAlgebra(), 100.0 * rng.standard_normal((4, 1)))
        result = train(net, X, rng.standard_normal((4, 1)), steps=200, step_size=10.0, seed=0)
        assert result.diverged

    def test_negative_steps(self):
        net = CStarNet.initialize(ScalarAlgebra(), [1, 1], "identity", seed=0)
        with pytest.raises(ValueError, match="steps"):
            train(net, np.zeros((1, 1)), np.zeros((1, 1)), steps=-1, step_size=0.1, seed=0)


class TestGradCheck:
    """Tests for grad_check (backprop against central differences)."""

    def test_identity_one_layer(self, descriptor, rng):
        net = CStarNet.initialize(descriptor, [2, 2], "identity", seed=1)
        X = random_inputs(descriptor, rng, 3, 2)
        Y = random_inputs(descriptor, rng, 3, 2)
        assert grad_check(net, X, Y) <= 1e-7

    def test_tanh_two_layers(self, descriptor, rng):
        net = CStarNet.initialize(descriptor, [2, 2, 1], "tanh", seed=2)
        X = random_inputs(descriptor, rng, 3, 2)
        Y = random_inputs(descriptor, rng, 3, 1)
        assert grad_check(net, X, Y) <= 1e-5

    def test_tanh_three_layers_grid(self, rng):
        descriptor = GridFunctionAlgebra.uniform(8)
        net = CStarNet.initialize(descriptor, [2, 2, 2, 1], "tanh", seed=3)
        X = random_inputs(descriptor, rng, 3, 2)
        Y = random_inputs(descriptor, rng, 3, 1)
        assert grad_check(net, X, Y) <= 1e-5

    def test_right_multiplication(self, rng):
        descriptor = DenseMatrixAlgebra(2)
        net = CStarNet.initialize(descriptor, [2, 2, 1], "tanh", seed=4, multiply="right")
        X = random_inputs(descriptor, rng, 3, 2)
        Y = random_inputs(descriptor, rng, 3, 1)
        assert grad_check(net, X, Y) <= 1e-5

    def test_basis_coefficients(self, rng):
        descriptor = GridFunctionAlgebra.uniform(6)
        evaluation = monomial_evaluation(descriptor.points, 3)
        net = CStarNet.initialize(descriptor, [2, 2, 1], ["tanh", "identity"], seed=5, basis_evaluation=evaluation)
        X = random_inputs(descriptor, rng, 3, 2)
        Y = random_inputs(descriptor, rng, 3, 1)
        assert grad_check(net, X, Y) <= 1e-5

    def test_relu_away_from_kinks(self, rng):
        descriptor = DenseMatrixAlgebra(2)
        for seed in range(50):
            net = CStarNet.initialize(descriptor, [2, 3, 1], "relu", seed=seed)
            X = random_inputs(descriptor, np.random.default_rng(seed), 3, 2)
            if away_from_kinks(net, X):
                break
        else:
            pytest.fail("no kink-free relu configuration found")
        Y = random_inputs(descriptor, rng, 3, 1)
        assert grad_check(net, X, Y) <= 1e-5

    def test_error_floor(self, rng, monkeypatch):
        descriptor = ScalarAlgebra()
        net = CStarNet.initialize(descriptor, [1, 1], "identity", seed=6)
        X = random_inputs(descriptor, rng, 4, 1)
        Y = random_inputs(descriptor, rng, 4, 1)
        loss, grads = net.loss_and_gradients(X, Y)
        g = grads[0].flat[0].real
        delta = 1e-3
        shifted = [p.copy() for p in grads]
        shifted[0].flat[0] += delta
        monkeypatch.setattr(net, "loss_and_gradients", lambda X, Y: (loss, shifted))

        for floor in (1.0, 1e-8):
            expected = delta / max(abs(g + delta), abs(g), floor)
            assert grad_check(net, X, Y, floor=floor) == pytest.approx(expected, rel=1e-4)

    def test_floor_must_be_positive(self):
        net = CStarNet.initialize(ScalarAlgebra(), [1, 1], "identity", seed=0)
        with pytest.raises(ValueError, match="floor"):
            grad_check(net, np.zeros((1, 1)), np.zeros((1, 1)), floor=0.0)
