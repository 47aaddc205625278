"""Tests for weight tying (app/net/tying.py)."""

import numpy as np
import pytest

from app.exceptions import InvalidPartitionException, ShapeMismatchException
from app.hilbert_module import ModuleVector
from app.net import (
    AlphaMap,
    ParameterMap,
    ScalarNet,
    build_tied_net,
    default_tying_grid,
    forward_at,
    instantiate_scalar_net,
    parameter_index_set,
    realize_scalar_net,
)

WIDTHS = [2, 3, 1]


class TestRealizeScalarNet:
    """Every Omega-valued scalar net is a slice of the fully free tied net."""

    def test_round_trip(self):
        template = ScalarNet.random(WIDTHS, "tanh", seed=11)
        net, z = realize_scalar_net(template)
        assert instantiate_scalar_net(net, z).allclose(template, atol=1e-12)

    def test_forward_matches_template(self, rng):
        template = ScalarNet.random(WIDTHS, ["relu", "tanh"], seed=12)
        net, z = realize_scalar_net(template)
        for x in rng.standard_normal((100, 2)):
            value = forward_at(net, ModuleVector.constant(net.descriptor, x), z)
            assert np.max(np.abs(value - template.forward(x))) <= 1e-12

    def test_complex_parameters_rejected(self):
        template = ScalarNet.random(WIDTHS, "tanh", seed=1, real=False)
        with pytest.raises(InvalidPartitionException, match="real"):
            realize_scalar_net(template)

    def test_out_of_bound_rejected(self):
        template = ScalarNet.random(WIDTHS, "tanh", seed=1, bound=1.0)
        with pytest.raises(InvalidPartitionException, match="lie in"):
            realize_scalar_net(template, bound=0.01)


class TestBuildTiedNet:
    """Tests for build_tied_net."""

    def test_fixed_map_is_constant(self):
        template = ScalarNet.random(WIDTHS, "tanh", seed=2)
        net = build_tied_net(ParameterMap.fixed(WIDTHS), template)
        assert net.descriptor.size == 1
        assert instantiate_scalar_net(net, 0).allclose(template)

    def test_fully_free_slices(self, rng):
        template = ScalarNet.random(WIDTHS, "tanh", seed=3)
        pm = ParameterMap.fully_free(WIDTHS, bound=1.0)
        assert pm.K == pm.N == len(parameter_index_set(WIDTHS))
        z_points = rng.uniform(-1.0, 1.0, (4, pm.K))
        net = build_tied_net(pm, template, z_points)
        for row, z in enumerate(z_points):
            assert np.allclose(instantiate_scalar_net(net, row).flat_parameters(), z, atol=1e-15)

    def test_single_coordinate_sweep(self):
        template = ScalarNet.random(WIDTHS, "tanh", seed=4)
        sweep = np.linspace(-1.0, 1.0, 5)[:, None]
        net = build_tied_net(ParameterMap.fully_tied(WIDTHS), template, sweep)
        for row, z in enumerate(sweep[:, 0]):
            assert np.allclose(instantiate_scalar_net(net, row).flat_parameters(), z)

    def test_partial_tying_keeps_fixed_values(self):
        template = ScalarNet.random(WIDTHS, "tanh", seed=5)
        pm = ParameterMap(WIDTHS, [[(0, 0, 0), (0, 1, 1)]])
        net = build_tied_net(pm, template, np.array([[0.25], [-0.5]]))
        positions = {index: n for n, index in enumerate(parameter_index_set(WIDTHS))}
        for row, z in enumerate([0.25, -0.5]):
            values = instantiate_scalar_net(net, row).flat_parameters()
            expected = template.flat_parameters().copy()
            expected[positions[(0, 0, 0)]] = z
            expected[positions[(0, 1, 1)]] = z
            assert np.allclose(values, expected)
        assert len(pm.fixed_indices) == pm.N - 2

    def test_default_grid(self):
        template = ScalarNet.random([1, 1], "identity", seed=6)
        pm = ParameterMap.fully_free([1, 1], bound=2.0)
        net = build_tied_net(pm, template, resolution=3)
        assert net.descriptor.size == 9
        assert np.allclose(net.descriptor.points.min(axis=0), -2.0)

    def test_alpha_maps_applied(self):
        template = ScalarNet.random([1, 1], "identity", seed=7)
        pm = ParameterMap.fully_free([1, 1], bound=1.0, kind="clamp")
        net = build_tied_net(pm, template, np.array([[5.0, -0.5]]))
        assert np.allclose(instantiate_scalar_net(net, 0).flat_parameters(), [1.0, -0.5])

    def test_template_widths_must_match(self):
        template = ScalarNet.random([2, 1], "tanh", seed=8)
        with pytest.raises(InvalidPartitionException, match="widths"):
            build_tied_net(ParameterMap.fixed(WIDTHS), template)

    def test_z_points_shape(self):
        template = ScalarNet.random(WIDTHS, "tanh", seed=8)
        with pytest.raises(ShapeMismatchException, match="K=1"):
            build_tied_net(ParameterMap.fully_tied(WIDTHS), template, np.zeros((3, 2)))


class TestParameterMap:
    """Partition validation."""

    def test_empty_block(self):
        with pytest.raises(InvalidPartitionException, match="is empty"):
            ParameterMap(WIDTHS, [[(0, 0, 0)], []])

    def test_unknown_index(self):
        with pytest.raises(InvalidPartitionException, match="not a parameter"):
            ParameterMap(WIDTHS, [[(3, 0, 0)]])

    def test_overlapping_blocks(self):
        with pytest.raises(InvalidPartitionException, match="more than one block"):
            ParameterMap(WIDTHS, [[(0, 0, 0)], [(0, 0, 0), (1, 0, 0)]])

    def test_alpha_for_untied_index(self):
        with pytest.raises(InvalidPartitionException, match="untied index"):
            ParameterMap(WIDTHS, [[(0, 0, 0)]], {(1, 0, 3): AlphaMap()})


class TestAlphaMap:
    """Surjections onto Omega = [-bound, bound]."""

    def test_identity(self):
        assert np.array_equal(AlphaMap()(np.array([-3.0, 0.5])), [-3.0, 0.5])

    def test_clamp_reaches_endpoints(self):
        alpha = AlphaMap("clamp", scale=2.0, bound=1.0)
        values = alpha(np.linspace(-5.0, 5.0, 101))
        assert values.min() == -1.0
        assert values.max() == 1.0

    def test_tanh_stays_inside(self):
        alpha = AlphaMap("tanh", bound=3.0)
        values = alpha(np.linspace(-4.0, 4.0, 41))
        assert np.all(np.abs(values) < 3.0)
        assert alpha(np.array([0.0]))[0] == 0.0


class TestDefaultTyingGrid:
    """Tests for default_tying_grid."""

    def test_product_grid(self):
        grid = default_tying_grid(2, bound=1.0, resolution=3)
        assert grid.shape == (9, 2)
        assert set(grid[:, 0]) == {-1.0, 0.0, 1.0}

    def test_sampled_when_too_large(self):
        grid = default_tying_grid(6, bound=1.0, resolution=5, seed=3, max_grid=16)
        assert grid.shape == (16, 6)
        assert np.all(np.abs(grid) <= 1.0)
        assert np.array_equal(grid, default_tying_grid(6, bound=1.0, resolution=5, seed=3, max_grid=16))

    def test_no_coordinates(self):
        assert default_tying_grid(0, bound=1.0).shape == (1, 0)
