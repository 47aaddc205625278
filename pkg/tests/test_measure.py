"""Tests for measure-averaged nets and the optimization over the measure."""

import numpy as np
import pytest

from app.algebras import DenseMatrixAlgebra, GridFunctionAlgebra
from app.exceptions import InvalidDescriptorException, ShapeMismatchException
from app.experiments import planted_measure_problem
from app.hilbert_module import ModuleVector
from app.net import (
    CStarNet,
    ProbabilityWeights,
    ScalarNet,
    average,
    convexity_violation,
    forward_at,
    lift_inputs,
    lift_scalar_net,
    measure_objective,
    optimize_measure,
    slice_outputs,
)


@pytest.fixture
def grid_net():
    return CStarNet.initialize(GridFunctionAlgebra.uniform(4), [2, 3, 2], "tanh", seed=21)


def constant_input(net, rng):
    return ModuleVector.constant(net.descriptor, rng.standard_normal(net.widths[0]))


class TestProbabilityWeights:
    """Tests for ProbabilityWeights."""

    def test_duplicate_support(self):
        with pytest.raises(ValueError, match="distinct"):
            ProbabilityWeights(np.array([1, 1]), np.array([0.5, 0.5]))

    def test_not_normalized(self):
        with pytest.raises(ValueError, match="simplex"):
            ProbabilityWeights(np.array([0, 1]), np.array([0.5, 0.4]))

    def test_negative_weight(self):
        with pytest.raises(ValueError, match="simplex"):
            ProbabilityWeights(np.array([0, 1]), np.array([1.5, -0.5]))

    def test_length_mismatch(self):
        with pytest.raises(ShapeMismatchException):
            ProbabilityWeights(np.array([0, 1, 2]), np.array([0.5, 0.5]))

    def test_dense(self):
        P = ProbabilityWeights(np.array([3, 0]), np.array([0.25, 0.75]))
        assert np.allclose(P.dense(5), [0.75, 0.0, 0.0, 0.25, 0.0])

    def test_support_off_grid(self):
        with pytest.raises(ShapeMismatchException, match="not on a grid"):
            ProbabilityWeights.dirac(4).dense(4)

    def test_payload_round_trip(self):
        P = ProbabilityWeights(np.array([0, 2]), np.array([0.3, 0.7]))
        restored = ProbabilityWeights.from_payload(P.to_payload())
        assert np.array_equal(restored.support, P.support)
        assert np.array_equal(restored.weights, P.weights)


class TestAverage:
    """Tests for average."""

    def test_dirac_is_slice(self, grid_net, rng):
        x = constant_input(grid_net, rng)
        for z in range(4):
            assert np.allclose(average(grid_net, x, ProbabilityWeights.dirac(z)), forward_at(grid_net, x, z), atol=1e-12)

    def test_uniform_on_constant_net(self, rng):
        template = ScalarNet.random([2, 2, 1], "tanh", seed=5)
        net = lift_scalar_net(template, GridFunctionAlgebra.uniform(3))
        x = constant_input(net, rng)
        value = average(net, x, ProbabilityWeights.uniform(range(3)))
        assert np.allclose(value, template.forward(x.coords[:, 0]), atol=1e-12)

    def test_two_points(self, grid_net, rng):
        x = constant_input(grid_net, rng)
        P = ProbabilityWeights(np.array([0, 2]), np.array([0.3, 0.7]))
        expected = 0.3 * forward_at(grid_net, x, 0) + 0.7 * forward_at(grid_net, x, 2)
        assert np.allclose(average(grid_net, x, P), expected, atol=1e-12)

    def test_requires_grid(self, rng):
        net = CStarNet.initialize(DenseMatrixAlgebra(2), [1, 1], "tanh", seed=0)
        x = ModuleVector.constant(net.descriptor, [1.0])
        with pytest.raises(InvalidDescriptorException, match="grid_function"):
            average(net, x, ProbabilityWeights.dirac(0))


class TestConvexity:
    """The loss is convex in the measure weights."""

    def test_random_segments(self, grid_net, rng):
        X = lift_inputs(grid_net.descriptor, rng.standard_normal((6, 2)))
        Y = rng.standard_normal((6, 2)) + 1j * rng.standard_normal((6, 2))
        F = slice_outputs(grid_net, X)
        ts = np.linspace(0.0, 1.0, 21)
        for _ in range(50):
            p, q = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(4))
            assert convexity_violation(F, Y, p, q, ts) <= 1e-10

    def test_equal_measures_no_violation(self, grid_net, rng):
        X = lift_inputs(grid_net.descriptor, rng.standard_normal((6, 2)))
        Y = rng.standard_normal((6, 2)) + 1j * rng.standard_normal((6, 2))
        F = slice_outputs(grid_net, X)
        p = rng.dirichlet(np.ones(4))
        assert convexity_violation(F, Y, p, p, [0.0, 0.5, 1.0]) == 0.0
        assert abs(convexity_violation(F, Y, p, p, np.linspace(0.0, 1.0, 21))) <= 1e-12

    def test_segment_endpoints_no_violation(self, grid_net, rng):
        X = lift_inputs(grid_net.descriptor, rng.standard_normal((6, 2)))
        Y = rng.standard_normal((6, 2)) + 1j * rng.standard_normal((6, 2))
        F = slice_outputs(grid_net, X)
        p, q = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(4))
        assert convexity_violation(F, Y, p, q, [0.0, 1.0]) == 0.0

    def test_objective_zero_at_exact_fit(self, grid_net, rng):
        X = lift_inputs(grid_net.descriptor, rng.standard_normal((3, 2)))
        F = slice_outputs(grid_net, X)
        p = np.array([0.1, 0.2, 0.3, 0.4])
        assert measure_objective(F, F @ p, p) == pytest.approx(0.0, abs=1e-24)


class TestOptimizeMeasure:
    """Tests for optimize_measure."""

    def test_single_support_point(self, grid_net, rng):
        X = lift_inputs(grid_net.descriptor, rng.standard_normal((4, 2)))
        Y = rng.standard_normal((4, 2))
        result = optimize_measure(grid_net, X, Y, ProbabilityWeights.dirac(1), steps=50)
        assert result.objective == result.initial_objective
        assert np.array_equal(result.weights.weights, [1.0])

    def test_never_worse_than_start(self, grid_net, rng):
        X = lift_inputs(grid_net.descriptor, rng.standard_normal((5, 2)))
        Y = rng.standard_normal((5, 2))
        result = optimize_measure(grid_net, X, Y, ProbabilityWeights.uniform(range(4)), steps=100)
        assert result.objective <= result.initial_objective
        assert result.weights.weights.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(result.weights.weights >= 0.0)

    def test_planted_measure_recovered(self):
        net, X, Y, planted = planted_measure_problem(seed=3)
        result = optimize_measure(net, X, Y, ProbabilityWeights.uniform(range(3)), steps=2000)
        assert result.objective - measure_objective(slice_outputs(net, X), Y, planted.weights) <= 1e-6

    def test_target_shape(self, grid_net, rng):
        X = lift_inputs(grid_net.descriptor, rng.standard_normal((2, 2)))
        with pytest.raises(ShapeMismatchException, match="Targets"):
            optimize_measure(grid_net, X, np.zeros((2, 3)), ProbabilityWeights.dirac(0), steps=1)
