"""
grid module - Step functions on the uniform K^d grid of I^d and continuum trajectories

A GridFunction stores one value per cell (cell averages) in labelling order; as a
function of s it is the step function constant on each cell. Refining to a
multiple of K and averaging down to a divisor of K are exact operations on step
functions, which is what makes the convergence functionals exact cell sums.

This module is licensed under the MIT License.
"""

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike

from pairwise_graphlimit.dynamics import DiscreteState, perfect_root
from pairwise_graphlimit.errors import ContractError
from pairwise_graphlimit.kernels import FloatArray
from pairwise_graphlimit.labeling import CubeLabeling


@dataclass(frozen=True)
class GridFunction:
    """
    Cell-averaged function on the K^d grid.

    Attributes:
        dim: d (dimension of the labelling cube)
        resolution: K
        values: Shape (K^d,) for scalar fields or (K^d, d) for opinion fields
    """

    dim: int
    resolution: int
    values: FloatArray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if self.dim < 1 or self.resolution < 1:
            msg = f"dim and resolution must be >= 1, got dim={self.dim}, K={self.resolution}"
            raise ContractError(msg)
        if values.ndim not in (1, 2) or values.shape[0] != self.resolution**self.dim:
            msg = f"expected {self.resolution**self.dim} cell values, got shape {values.shape}"
            raise ContractError(msg)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, dim: int, values: ArrayLike) -> "GridFunction":
        """Infer K from the number of cells."""
        array = np.asarray(values, dtype=np.float64)
        return cls(dim, perfect_root(array.shape[0], dim), array)

    @property
    def labeling(self) -> CubeLabeling:
        return CubeLabeling(self.dim, self.resolution)

    @property
    def cell_count(self) -> int:
        return int(self.values.shape[0])

    @property
    def is_vector(self) -> bool:
        return self.values.ndim == 2

    def mean(self) -> FloatArray | float:
        """Integral over I^d (every cell has measure K^{-d})."""
        result = np.mean(self.values, axis=0)
        return float(result) if np.ndim(result) == 0 else result

    def check_mass(self, tolerance: float = 1e-8) -> None:
        """
        Check that a scalar grid is a valid mass density (positive, unit integral).

        Raises:
            ContractError: If a value is non-positive or the mean is not 1
        """
        if self.is_vector:
            msg = "a mass grid must be scalar"
            raise ContractError(msg)
        if np.any(self.values <= 0):
            msg = "mass grid has non-positive cells"
            raise ContractError(msg)
        mean = float(np.mean(self.values))
        if abs(mean - 1.0) > tolerance:
            msg = f"mass grid integrates to {mean:.12g}, not 1"
            raise ContractError(msg)

    def require_compatible(self, other: "GridFunction") -> None:
        if other.dim != self.dim or other.resolution != self.resolution:
            msg = (
                f"resolution mismatch: (d={self.dim}, K={self.resolution}) vs (d={other.dim}, K={other.resolution})"
            )
            raise ContractError(msg)

    def refine(self, resolution: int) -> "GridFunction":
        """
        The same step function on a finer grid.

        Raises:
            ContractError: If resolution is not a multiple of K
        """
        if resolution % self.resolution:
            msg = f"cannot refine K={self.resolution} to {resolution}: not a multiple"
            raise ContractError(msg)
        if resolution == self.resolution:
            return self
        fine = CubeLabeling(self.dim, resolution)
        coarse_cells = self.labeling.flat_indices(fine.multi_indices // (resolution // self.resolution))
        return GridFunction(self.dim, resolution, self.values[coarse_cells])

    def coarsen(self, resolution: int) -> "GridFunction":
        """
        Cell averages on a coarser grid.

        Raises:
            ContractError: If resolution does not divide K
        """
        if resolution < 1 or self.resolution % resolution:
            msg = f"cannot coarsen K={self.resolution} to {resolution}: not a divisor"
            raise ContractError(msg)
        if resolution == self.resolution:
            return self
        coarse = CubeLabeling(self.dim, resolution)
        coarse_cells = coarse.flat_indices(self.labeling.multi_indices // (self.resolution // resolution))
        block = (self.resolution // resolution) ** self.dim
        shape = (coarse.size, *self.values.shape[1:])
        sums = np.zeros(shape)
        np.add.at(sums, coarse_cells, self.values)
        return GridFunction(self.dim, resolution, sums / block)

    def evaluate(self, points: ArrayLike) -> FloatArray:
        """
        Pointwise value of the step function at points of I^d.

        Args:
            points: Shape (n, d), or (n,) / scalar when d = 1
        """
        array = np.asarray(points, dtype=np.float64)
        return self.values[self.labeling.cell_of(array.reshape(-1, self.dim))]


@dataclass(frozen=True)
class ContinuumTrajectory:
    """
    Samples of (x(t, ·), m(t, ·)) on the K^d grid.

    Attributes:
        dim: d
        resolution: K
        times: Shape (R,)
        positions: Shape (R, K^d, d)
        masses: Shape (R, K^d)
    """

    dim: int
    resolution: int
    times: FloatArray
    positions: FloatArray
    masses: FloatArray

    def __post_init__(self) -> None:
        for name in ("times", "positions", "masses"):
            array = np.array(getattr(self, name), dtype=np.float64)
            array.setflags(write=False)
            object.__setattr__(self, name, array)
        cells = self.resolution**self.dim
        if self.positions.shape[1:] != (cells, self.dim) or self.masses.shape[1:] != (cells,):
            msg = f"trajectory arrays do not match K^d = {cells} cells in dimension {self.dim}"
            raise ContractError(msg)
        if not (self.times.shape[0] == self.positions.shape[0] == self.masses.shape[0]):
            msg = "trajectory arrays have different sample counts"
            raise ContractError(msg)

    @classmethod
    def constant(cls, xgrid: GridFunction, mgrid: GridFunction, times: ArrayLike) -> "ContinuumTrajectory":
        """The pair (x0, m0) held constant over the given times."""
        xgrid.require_compatible(mgrid)
        time_array = np.asarray(times, dtype=np.float64)
        count = time_array.shape[0]
        positions = np.broadcast_to(as_positions(xgrid), (count, *as_positions(xgrid).shape))
        masses = np.broadcast_to(mgrid.values, (count, *mgrid.values.shape))
        return cls(xgrid.dim, xgrid.resolution, time_array, positions, masses)

    def index_of(self, t: float, tolerance: float = 1e-9) -> int:
        matches = np.flatnonzero(np.abs(self.times - t) <= tolerance * max(1.0, abs(t)))
        if matches.size == 0:
            msg = f"time {t} is not a recorded sample"
            raise ContractError(msg)
        return int(matches[0])

    def grids_at(self, t: float) -> tuple[GridFunction, GridFunction]:
        index = self.index_of(t)
        return self.grids_at_index(index)

    def grids_at_index(self, index: int) -> tuple[GridFunction, GridFunction]:
        return (
            GridFunction(self.dim, self.resolution, self.positions[index]),
            GridFunction(self.dim, self.resolution, self.masses[index]),
        )

    def sup_difference(self, other: "ContinuumTrajectory") -> tuple[float, float]:
        """
        Sup over shared sample times and cells of |x - x'| and |m - m'|.

        Raises:
            ContractError: If resolutions differ or no sample time is shared
        """
        if (other.dim, other.resolution) != (self.dim, self.resolution):
            msg = "trajectories live on different grids"
            raise ContractError(msg)
        position_sup = 0.0
        mass_sup = 0.0
        shared = 0
        for index, t in enumerate(self.times):
            matches = np.flatnonzero(np.abs(other.times - t) <= 1e-9 * max(1.0, abs(float(t))))
            if matches.size == 0:
                continue
            shared += 1
            j = int(matches[0])
            position_sup = max(position_sup, float(np.max(np.linalg.norm(self.positions[index] - other.positions[j], axis=-1))))
            mass_sup = max(mass_sup, float(np.max(np.abs(self.masses[index] - other.masses[j]))))
        if not shared:
            msg = "trajectories share no sample time"
            raise ContractError(msg)
        return position_sup, mass_sup

    def write_csv(self, path: Path) -> None:
        """Write rows 't, cell_multi_index, x_1..x_d, m' (multi-index 1-based, components joined by ':')."""
        labels = [":".join(str(c + 1) for c in row) for row in CubeLabeling(self.dim, self.resolution).multi_indices]
        header = ["t", "cell_multi_index", *[f"x_{k + 1}" for k in range(self.dim)], "m"]
        with Path(path).open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            for r, t in enumerate(self.times):
                for cell, label in enumerate(labels):
                    writer.writerow([repr(float(t)), label, *map(repr, self.positions[r, cell].tolist()), repr(float(self.masses[r, cell]))])


def as_positions(xgrid: GridFunction) -> FloatArray:
    """Opinion grid values as shape (K^d, d)."""
    return xgrid.values if xgrid.is_vector else xgrid.values[:, None]


def grids_to_state(xgrid: GridFunction, mgrid: GridFunction, time: float = 0.0) -> DiscreteState:
    """The P = K^d particle state carrying the cell values of the grids."""
    xgrid.require_compatible(mgrid)
    return DiscreteState(time=time, positions=as_positions(xgrid), masses=mgrid.values)


def state_to_grids(state: DiscreteState) -> tuple[GridFunction, GridFunction]:
    """Cell values of a particle state as grids at resolution N."""
    return (
        GridFunction(state.dim, state.side, state.positions),
        GridFunction(state.dim, state.side, state.masses),
    )
