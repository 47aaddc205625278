"""Block-diagonal matrices, i.e. finite direct sums of full matrix algebras."""

from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from app.algebras.base import AlgebraDescriptor
from app.exceptions import InvalidDescriptorException


class BlockDiagonalAlgebra(AlgebraDescriptor):
    """Direct sum of b_1 x b_1, ..., b_r x b_r matrix blocks.

    Coordinates are the row-major entries of each block, concatenated.
    Off-block entries are never stored.
    """

    def __init__(self, blocks: Sequence[int]):
        blocks = tuple(int(b) for b in blocks)
        if not blocks or any(b < 1 for b in blocks):
            raise InvalidDescriptorException(
                f"block_diagonal needs a non-empty list of block sizes >= 1, got {list(blocks)}"
            )
        self.blocks = blocks
        self._offsets = np.concatenate([[0], np.cumsum([b * b for b in blocks])]).astype(int)
        self._positions = np.concatenate([[0], np.cumsum(blocks)]).astype(int)

    @property
    def kind(self) -> str:
        return "block_diagonal"

    @property
    def coord_shape(self) -> Tuple[int, ...]:
        return (int(self._offsets[-1]),)

    @property
    def representation_size(self) -> int:
        return int(self._positions[-1])

    @property
    def is_commutative(self) -> bool:
        return all(b == 1 for b in self.blocks)

    def split(self, a: np.ndarray) -> List[np.ndarray]:
        """Split coordinates into the list of (..., b, b) blocks."""
        a = np.asarray(a)
        return [
            a[..., self._offsets[r]:self._offsets[r + 1]].reshape(a.shape[:-1] + (b, b))
            for r, b in enumerate(self.blocks)
        ]

    def join(self, blocks: List[np.ndarray]) -> np.ndarray:
        """Inverse of ``split``."""
        lead = np.broadcast_shapes(*(block.shape[:-2] for block in blocks))
        return np.concatenate(
            [np.broadcast_to(block, lead + block.shape[-2:]).reshape(lead + (-1,)) for block in blocks],
            axis=-1,
        )

    def mul_coords(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.join([np.matmul(x, y) for x, y in zip(self.split(a), self.split(b))])

    def star_coords(self, a: np.ndarray) -> np.ndarray:
        return self.join([np.conj(np.swapaxes(x, -1, -2)) for x in self.split(a)])

    def identity_coords(self) -> np.ndarray:
        return self.join([np.eye(b, dtype=complex) for b in self.blocks])

    def represent(self, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=complex)
        size = self.representation_size
        matrix = np.zeros(a.shape[:-1] + (size, size), dtype=complex)
        for r, block in enumerate(self.split(a)):
            lo, hi = self._positions[r], self._positions[r + 1]
            matrix[..., lo:hi, lo:hi] = block
        return matrix

    def from_representation(self, matrix: np.ndarray) -> np.ndarray:
        matrix = np.asarray(matrix, dtype=complex)
        return self.join([
            matrix[..., self._positions[r]:self._positions[r + 1], self._positions[r]:self._positions[r + 1]]
            for r in range(len(self.blocks))
        ])

    def norm_coords(self, a: np.ndarray) -> float:
        return max(float(np.linalg.norm(block, ord=2)) for block in self.split(a))

    def spec(self) -> Dict[str, Any]:
        return {"kind": self.kind, "blocks": list(self.blocks)}

    def key(self) -> tuple:
        return (self.kind, self.blocks)
