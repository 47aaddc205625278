"""Shared fixtures and environment setup for cstar-learn tests."""

import os

# Set environment variables BEFORE any app imports
os.environ.setdefault("CSTAR_LOG", "WARNING")
os.environ.setdefault("CSTAR_POSITIVITY_TOL", "1e-8")
os.environ.setdefault("CSTAR_OMEGA_BOUND", "10")
os.environ.setdefault("CSTAR_THREADS", "1")
os.environ.setdefault("CSTAR_OUTPUT_DIR", "artifacts")

import numpy as np
import pytest

from app.algebras import (
    BlockDiagonalAlgebra,
    CirculantAlgebra,
    DenseMatrixAlgebra,
    GridFunctionAlgebra,
    ScalarAlgebra,
    cyclic_group,
    symmetric_group,
)
from app.datasets import Dataset


def make_descriptors():
    """One small descriptor of every kind, keyed by a readable id."""
    return {
        "scalar": ScalarAlgebra(),
        "dense_matrix": DenseMatrixAlgebra(3),
        "circulant": CirculantAlgebra(4),
        "block_diagonal": BlockDiagonalAlgebra([1, 2]),
        "grid_function": GridFunctionAlgebra.uniform(5),
        "group_cyclic": cyclic_group(3),
        "group_symmetric": symmetric_group(3),
    }


DESCRIPTOR_IDS = list(make_descriptors())


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded random generator."""
    return np.random.default_rng(1234)


@pytest.fixture(params=DESCRIPTOR_IDS)
def descriptor(request):
    """Each algebra kind in turn."""
    return make_descriptors()[request.param]


@pytest.fixture
def scalar_dataset() -> Dataset:
    """Eight scalar samples y = sin(x0) + 0.5 x1."""
    rng = np.random.default_rng(7)
    inputs = rng.uniform(-1.0, 1.0, (8, 2))
    targets = (np.sin(inputs[:, 0]) + 0.5 * inputs[:, 1])[:, None]
    return Dataset(ScalarAlgebra(), inputs, targets)


@pytest.fixture
def matrix_dataset() -> Dataset:
    """Eight samples with 2 x 2 complex matrix outputs."""
    rng = np.random.default_rng(11)
    inputs = rng.uniform(-1.0, 1.0, (8, 1))
    targets = rng.standard_normal((8, 1, 2, 2)) + 1j * rng.standard_normal((8, 1, 2, 2))
    return Dataset(DenseMatrixAlgebra(2), inputs, targets)


@pytest.fixture
def grid_dataset() -> Dataset:
    """Ten samples with grid-function outputs on 4 points."""
    rng = np.random.default_rng(13)
    descriptor = GridFunctionAlgebra.uniform(4)
    inputs = rng.uniform(-1.0, 1.0, (10, 2))
    targets = np.cos(inputs[:, :1, None] + descriptor.points[:, 0][None, None, :])
    return Dataset(descriptor, inputs, targets.astype(complex))
