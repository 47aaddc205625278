"""C*-algebra neural networks."""

from app.net.activations import ACTIVATIONS, Activation, Identity, Linear, ReLU, Tanh, build_activation
from app.net.basis import BasisWeights, monomial_evaluation
from app.net.equivariance import build_group_net, equivariance_check, identity_group_net
from app.net.measure import (
    MeasureResult,
    ProbabilityWeights,
    average,
    convexity_violation,
    measure_objective,
    optimize_measure,
    slice_outputs,
)
from app.net.network import (
    CStarLayer,
    CStarNet,
    forward,
    forward_at,
    instantiate_scalar_net,
    lift_inputs,
    lift_scalar_net,
)
from app.net.polynomial import (
    build_polynomial_net,
    fit_residuals,
    poly_degree_check,
    polynomial_expansion,
    symbolic_coefficients,
    symbolic_slice,
)
from app.net.scalar_net import ScalarNet, parameter_index_set
from app.net.training import TrainingResult, grad_check, train
from app.net.tying import AlphaMap, ParameterMap, build_tied_net, default_tying_grid, realize_scalar_net

__all__ = [
    "ACTIVATIONS",
    "Activation",
    "Identity",
    "Linear",
    "ReLU",
    "Tanh",
    "build_activation",
    "BasisWeights",
    "monomial_evaluation",
    "build_group_net",
    "equivariance_check",
    "identity_group_net",
    "MeasureResult",
    "ProbabilityWeights",
    "average",
    "convexity_violation",
    "measure_objective",
    "optimize_measure",
    "slice_outputs",
    "CStarLayer",
    "CStarNet",
    "forward",
    "forward_at",
    "instantiate_scalar_net",
    "lift_inputs",
    "lift_scalar_net",
    "build_polynomial_net",
    "fit_residuals",
    "poly_degree_check",
    "polynomial_expansion",
    "symbolic_coefficients",
    "symbolic_slice",
    "ScalarNet",
    "parameter_index_set",
    "TrainingResult",
    "grad_check",
    "train",
    "AlphaMap",
    "ParameterMap",
    "build_tied_net",
    "default_tying_grid",
    "realize_scalar_net",
]
