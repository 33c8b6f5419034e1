"""
labeling module - Bijection between cube multi-indices and flat particle indices

Particles of a d-dimensional system are labelled by the cells Q_i of the uniform
N^d grid on the unit cube. The flat index follows row-major order with the first
component varying fastest:

    sigma(i_1, ..., i_d) = i_1 + (i_2 - 1)·N + ... + (i_d - 1)·N^{d-1}

Indices are 1-based in label/unlabel (as in the model) and 0-based in the
vectorised helpers used by the grid code.

This module is licensed under the MIT License.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import NDArray

from pairwise_graphlimit.errors import ContractError


@dataclass(frozen=True)
class CubeLabeling:
    """
    Row-major labelling of the N^d cells of I^d.

    Attributes:
        dim: d
        side: N
    """

    dim: int
    side: int

    def __post_init__(self) -> None:
        if self.dim < 1 or self.side < 1:
            msg = f"dim and side must be >= 1, got dim={self.dim}, side={self.side}"
            raise ContractError(msg)

    @property
    def size(self) -> int:
        """N^d."""
        return int(self.side**self.dim)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.side,) * self.dim

    def label(self, multi_index: Sequence[int]) -> int:
        """
        Flat 1-based index of a 1-based multi-index.

        Raises:
            ContractError: If the multi-index has the wrong length or is out of range

        Examples:
            >>> CubeLabeling(2, 2).label((2, 1))   # 2
            >>> CubeLabeling(2, 2).label((1, 2))   # 3
        """
        if len(multi_index) != self.dim:
            msg = f"expected {self.dim} indices, got {len(multi_index)}"
            raise ContractError(msg)
        flat = 0
        stride = 1
        for component in multi_index:
            if not 1 <= component <= self.side:
                msg = f"index component {component} outside 1..{self.side}"
                raise ContractError(msg)
            flat += (component - 1) * stride
            stride *= self.side
        return flat + 1

    def unlabel(self, flat: int) -> tuple[int, ...]:
        """
        1-based multi-index of a flat 1-based index.

        Raises:
            ContractError: If flat is outside 1..N^d
        """
        if not 1 <= flat <= self.size:
            msg = f"flat index {flat} outside 1..{self.size}"
            raise ContractError(msg)
        remainder = flat - 1
        components = []
        for _ in range(self.dim):
            remainder, component = divmod(remainder, self.side)
            components.append(component + 1)
        return tuple(components)

    @cached_property
    def multi_indices(self) -> NDArray[np.int64]:
        """0-based multi-indices of all cells in flat order, shape (N^d, d)."""
        unraveled = np.unravel_index(np.arange(self.size), self.shape, order="F")
        return np.stack(unraveled, axis=-1).astype(np.int64)

    def flat_indices(self, multi_indices: NDArray[np.int64]) -> NDArray[np.int64]:
        """0-based flat indices of 0-based multi-indices (last axis holds the d components)."""
        strides = self.side ** np.arange(self.dim, dtype=np.int64)
        return np.asarray(multi_indices @ strides, dtype=np.int64)

    def cell_lower_corners(self) -> NDArray[np.float64]:
        """Lower corners of the cells in flat order, shape (N^d, d)."""
        return self.multi_indices / self.side

    def cell_of(self, points: NDArray[np.float64]) -> NDArray[np.int64]:
        """0-based flat index of the cell containing each point of I^d (the upper face belongs to the last cell)."""
        cells = np.clip(np.floor(np.asarray(points, dtype=np.float64) * self.side), 0, self.side - 1).astype(np.int64)
        return self.flat_indices(cells)
