"""Group C*-algebra C*(G) of a finite group G."""

import itertools
import logging
from typing import Any, Dict, Optional, Tuple

import numpy as np

from app.algebras.base import AlgebraDescriptor
from app.config import config
from app.exceptions import InvalidDescriptorException

logger = logging.getLogger(__name__)


def _validate_table(table: np.ndarray, check_limit: int) -> int:
    """Check the group axioms and return the index of the identity."""
    if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] < 1:
        raise InvalidDescriptorException(f"group table must be square and non-empty, got shape {table.shape}")
    n = table.shape[0]
    if table.min() < 0 or table.max() >= n:
        raise InvalidDescriptorException(f"group table entries must lie in [0, {n})")

    expected = np.arange(n)
    rows_ok = np.all(np.sort(table, axis=1) == expected)
    cols_ok = np.all(np.sort(table, axis=0) == expected[:, None])
    if not (rows_ok and cols_ok):
        raise InvalidDescriptorException("group table rows and columns must be permutations (Latin square)")

    identities = [e for e in range(n) if np.array_equal(table[e], expected) and np.array_equal(table[:, e], expected)]
    if not identities:
        raise InvalidDescriptorException("group table has no identity element")

    if n <= check_limit:
        left = table[table, :]  # left[a, b, c] = (ab)c
        right = table[:, table]  # right[a, b, c] = a(bc)
        if not np.array_equal(left, right):
            raise InvalidDescriptorException("group table is not associative")
    else:
        logger.warning(f"Skipping exhaustive associativity check for group of order {n} > {check_limit}")

    return identities[0]


class GroupAlgebra(AlgebraDescriptor):
    """Coefficient functions a: G -> C with convolution and a*(g) = conj(a(g^-1)).

    ``table[g, h]`` is the index of the product gh. The C*-norm is the
    operator norm of the left regular representation, which equals the
    supremum over irreducible representations for finite groups.
    """

    def __init__(self, table: np.ndarray, name: Optional[str] = None):
        table = np.asarray(table, dtype=int)
        self.identity_index = _validate_table(table, config.CSTAR_GROUP_CHECK_LIMIT)
        self.table = table
        self.table.setflags(write=False)
        self.name = name
        n = table.shape[0]
        self.inverse = np.array([int(np.flatnonzero(table[g] == self.identity_index)[0]) for g in range(n)])
        # (a b)(g) = sum_h a(h) b(h^-1 g)
        self._product_index = table[self.inverse].T
        # R(a)[g, h] = a(g h^-1)
        self._representation_index = table[:, self.inverse]

    @property
    def kind(self) -> str:
        return "group_algebra"

    @property
    def order(self) -> int:
        return int(self.table.shape[0])

    @property
    def coord_shape(self) -> Tuple[int, ...]:
        return (self.order,)

    @property
    def representation_size(self) -> int:
        return self.order

    @property
    def is_commutative(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def mul_coords(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.einsum("...h,...gh->...g", a, np.asarray(b)[..., self._product_index])

    def star_coords(self, a: np.ndarray) -> np.ndarray:
        return np.conj(np.asarray(a)[..., self.inverse])

    def identity_coords(self) -> np.ndarray:
        return self.delta(self.identity_index)

    def delta(self, g: int) -> np.ndarray:
        """Coordinates of the point mass at group element g."""
        coords = np.zeros(self.order, dtype=complex)
        coords[g] = 1.0
        return coords

    def represent(self, a: np.ndarray) -> np.ndarray:
        return np.asarray(a, dtype=complex)[..., self._representation_index]

    def from_representation(self, matrix: np.ndarray) -> np.ndarray:
        # column of the identity: R(a)[g, e] = a(g)
        return np.asarray(matrix, dtype=complex)[..., :, self.identity_index]

    def right_translate(self, a: np.ndarray, g: int) -> np.ndarray:
        """(rho_g a)(h) = a(hg), applied on the last axis."""
        return np.asarray(a)[..., self.table[:, g]]

    def spec(self) -> Dict[str, Any]:
        spec = {"kind": self.kind, "order": self.order, "table": self.table.ravel().tolist()}
        if self.name:
            spec["name"] = self.name
        return spec

    def key(self) -> tuple:
        return (self.kind, self.table.shape, self.table.tobytes())


def cyclic_group(n: int) -> GroupAlgebra:
    """C*(Z/n)."""
    if int(n) < 1:
        raise InvalidDescriptorException(f"cyclic group order must be >= 1, got {n}")
    steps = np.arange(int(n))
    return GroupAlgebra((steps[:, None] + steps[None, :]) % int(n), name=f"Z/{int(n)}")


def symmetric_group(n: int) -> GroupAlgebra:
    """C*(S_n) with (pq)(i) = p(q(i)); the identity permutation has index 0."""
    if not 1 <= int(n) <= 4:
        raise InvalidDescriptorException(f"symmetric group degree must be in [1, 4], got {n}")
    perms = list(itertools.permutations(range(int(n))))
    lookup = {p: i for i, p in enumerate(perms)}
    table = np.array([[lookup[tuple(p[q[i]] for i in range(int(n)))] for q in perms] for p in perms])
    return GroupAlgebra(table, name=f"S_{int(n)}")


def dihedral_group(n: int) -> GroupAlgebra:
    """C*(D_n), elements r^k s^f encoded as k + n f."""
    n = int(n)
    if n < 1:
        raise InvalidDescriptorException(f"dihedral group parameter must be >= 1, got {n}")
    elements = [(k, f) for f in range(2) for k in range(n)]
    lookup = {e: i for i, e in enumerate(elements)}
    table = np.array([
        [lookup[((k1 + (-1) ** f1 * k2) % n, f1 ^ f2)] for (k2, f2) in elements]
        for (k1, f1) in elements
    ])
    return GroupAlgebra(table, name=f"D_{n}")
