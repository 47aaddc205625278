"""Polynomial structure of basis-parameterized nets with linear activations.

With linear activations, constant input and constant biases, z -> f_z(x) is
a polynomial of degree at most L in the basis values v_1(z), ..., v_m(z).
"""

import itertools
import logging
from collections import Counter
from math import comb
from typing import Dict, List, Sequence, Tuple

import numpy as np
import sympy
from scipy import linalg

from app.algebras import GridFunctionAlgebra
from app.exceptions import InvalidDescriptorException, PropertyViolationException
from app.net.activations import Activation, Linear
from app.net.basis import BasisWeights
from app.net.network import CStarLayer, CStarNet, lift_inputs

logger = logging.getLogger(__name__)

ACCEPT_RESIDUAL = 1e-8
REJECT_RESIDUAL = 1e-3

Exponent = Tuple[int, ...]


def polynomial_grid(depth: int, m: int, seed: int) -> np.ndarray:
    """max(4 (L + 1) m, 2 C(m + L, L)) seeded points uniform in [-1, 1]^m."""
    count = max(4 * (depth + 1) * m, 2 * comb(m + depth, depth))
    return np.random.default_rng(seed).uniform(-1.0, 1.0, (count, m))


def build_polynomial_net(
    depth: int,
    m: int,
    seed: int,
    width: int = 2,
    input_dim: int = 2,
    output_dim: int = 1,
    slope: float = 1.0,
) -> Tuple[CStarNet, np.ndarray]:
    """
    Basis net with v_l(z) = z_l, standard normal coefficients and biases, and linear activations.

    Returns:
        (net, x) with x a standard normal constant input of length ``input_dim``
    """
    points = polynomial_grid(depth, m, seed)
    descriptor = GridFunctionAlgebra(points)
    rng = np.random.default_rng(seed + 1)
    widths = [input_dim] + [width] * (depth - 1) + [output_dim]
    coefficients = [rng.standard_normal((m, widths[j + 1], widths[j])) for j in range(depth)]
    biases = [rng.standard_normal(widths[j + 1]) for j in range(depth)]
    basis = BasisWeights(points, coefficients, biases)
    layers = [
        CStarLayer(np.zeros((widths[j + 1], widths[j], points.shape[0])), np.zeros((widths[j + 1], points.shape[0])), Linear(slope))
        for j in range(depth)
    ]
    x = rng.standard_normal(input_dim)
    return CStarNet(descriptor, layers, basis=basis), x


def _slope(activation: Activation) -> float:
    return getattr(activation, "slope", 1.0)


def _require_polynomial_net(net: CStarNet) -> BasisWeights:
    if net.basis is None:
        raise InvalidDescriptorException("Polynomial structure needs a basis-parameterized grid net")
    for j, activation in enumerate(net.activations):
        if not activation.is_linear:
            raise ValueError(f"layer {j} activation '{activation.name}' is not linear")
    return net.basis


def monomial_exponents(m: int, degree: int) -> List[Exponent]:
    """Exponent tuples of all monomials in m variables of total degree <= ``degree``."""
    exponents = []
    for total in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(m), total):
            counts = Counter(combo)
            exponents.append(tuple(counts.get(l, 0) for l in range(m)))
    return exponents


def design_matrix(values: np.ndarray, degree: int) -> np.ndarray:
    """Monomials of total degree <= ``degree`` evaluated at each row of ``values`` (grid, m)."""
    values = np.asarray(values)
    exponents = np.array(monomial_exponents(values.shape[1], degree))
    return np.prod(values[:, None, :] ** exponents[None, :, :], axis=2)


def slice_values(net: CStarNet, x: np.ndarray) -> np.ndarray:
    """f_z(x) for a constant input x, shape (grid, d_L)."""
    X = lift_inputs(net.descriptor, np.asarray(x, dtype=complex)[None])
    return net.forward_batch(X)[0].T


def fit_residuals(net: CStarNet, x: np.ndarray, max_degree: int) -> List[float]:
    """Relative least-squares residual of fitting z -> f_z(x) with polynomials of degree 0..max_degree."""
    basis = _require_polynomial_net(net)
    values = slice_values(net, x)
    scale = np.linalg.norm(values)
    residuals = []
    for degree in range(max_degree + 1):
        A = design_matrix(basis.evaluation, degree)
        coefficients, _, _, _ = linalg.lstsq(A, values)
        residual = np.linalg.norm(A @ coefficients - values)
        residuals.append(float(residual / scale) if scale > 0 else 0.0)
    return residuals


def poly_degree_check(net: CStarNet, x: np.ndarray, accept: float = ACCEPT_RESIDUAL) -> int:
    """
    Smallest D whose degree-D polynomial fit in (v_1(z), ..., v_m(z)) has relative residual <= ``accept``.

    Raises:
        PropertyViolationException: If no D <= L fits
    """
    depth = net.depth
    residuals = fit_residuals(net, x, depth)
    for degree, residual in enumerate(residuals):
        if residual <= accept:
            logger.debug(f"Polynomial degree {degree} (L={depth}), residuals {residuals}")
            return degree
    raise PropertyViolationException(
        f"z -> f_z(x) is not a polynomial of degree <= L={depth}: residuals {residuals}"
    )


def polynomial_expansion(net: CStarNet, x: np.ndarray) -> Dict[Exponent, np.ndarray]:
    """
    Explicit expansion of f_z(x) in the basis values.

    h_L = (prod_i s_i) W^L...W^1 x + sum_j (prod_{i >= j} s_i) W^L...W^{j+1} b^j with
    W^j = sum_l c^j_l v_l, expanded over every index tuple (l_L, ..., l_{j+1}).

    Returns:
        Map from exponent tuple to the (d_L,) coefficient vector
    """
    basis = _require_polynomial_net(net)
    m = basis.size
    depth = net.depth
    slopes = [_slope(a) for a in net.activations]
    terms: Dict[Exponent, np.ndarray] = {}

    # start = 0 is the input path, start = j >= 1 the bias of layer j
    for start in range(depth + 1):
        if start == 0:
            source = np.asarray(x, dtype=complex)
            factor = np.prod(slopes)
        else:
            source = basis.biases[start - 1]
            factor = np.prod(slopes[start - 1:])
        for path in itertools.product(range(m), repeat=depth - start):
            vector = source
            for offset, l in enumerate(path):
                vector = basis.coefficients[start + offset][l] @ vector
            counts = Counter(path)
            exponent = tuple(counts.get(l, 0) for l in range(m))
            terms[exponent] = terms.get(exponent, 0) + factor * vector
    return terms


def _sympy_number(value: complex) -> sympy.Expr:
    value = complex(value)
    return sympy.Float(value.real) + sympy.I * sympy.Float(value.imag)


def symbolic_slice(net: CStarNet, x: np.ndarray) -> Tuple[List[sympy.Expr], Sequence[sympy.Symbol]]:
    """f_z(x) as expanded sympy polynomials in symbols v1..vm."""
    basis = _require_polynomial_net(net)
    symbols = sympy.symbols(f"v1:{basis.size + 1}")
    h = sympy.Matrix([_sympy_number(v) for v in np.asarray(x, dtype=complex)])
    for j, activation in enumerate(net.activations):
        c = basis.coefficients[j]
        W = sympy.zeros(c.shape[1], c.shape[2])
        for l, symbol in enumerate(symbols):
            W += sympy.Matrix(c.shape[1], c.shape[2], [_sympy_number(v) for v in c[l].ravel()]) * symbol
        b = sympy.Matrix([_sympy_number(v) for v in basis.biases[j]])
        h = _sympy_number(_slope(activation)) * (W * h + b)
    return [sympy.expand(e) for e in h], symbols


def symbolic_coefficients(net: CStarNet, x: np.ndarray) -> Dict[Exponent, np.ndarray]:
    """Monomial coefficients of ``symbolic_slice``, in the layout of ``polynomial_expansion``."""
    expressions, symbols = symbolic_slice(net, x)
    terms: Dict[Exponent, np.ndarray] = {}
    for o, expression in enumerate(expressions):
        for exponent, coefficient in sympy.Poly(expression, *symbols).as_dict().items():
            vector = terms.setdefault(tuple(exponent), np.zeros(len(expressions), dtype=complex))
            vector[o] = complex(coefficient)
    return terms
