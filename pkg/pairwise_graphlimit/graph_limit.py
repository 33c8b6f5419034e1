"""
graph_limit module - The continuum graph-limit equation on a uniform grid

    dx/dt(t, s) = int m(t, s*) a(x(t, s*) - x(t, s)) ds*
    dm/dt(t, s) = Psi(s, x(t, .), m(t, .))

    Psi(s, x, m) = m(s) iint m(s*) m(s**) (a(x(s**) - x(s)) + a(x(s**) - x(s*)))·s(x(s) - x(s*)) ds* ds**

For step functions on K^d cells every integral is an exact cell sum weighted by
K^{-d}, so the grid system at resolution K is the particle system with P = K^d.
grid_rhs therefore delegates to the particle right-hand sides, and solve_direct
to the particle integrator.

This module is licensed under the MIT License.
"""

import logging

import numpy as np

from pairwise_graphlimit.dynamics import Dynamics
from pairwise_graphlimit.errors import ContractError, PreconditionError
from pairwise_graphlimit.grid import ContinuumTrajectory, GridFunction, grids_to_state
from pairwise_graphlimit.integrator import Integrator, IntegratorConfig
from pairwise_graphlimit.kernels import InfluenceKernel, SignMap

logger = logging.getLogger(__name__)


class GraphLimit:
    """Evaluation and direct time stepping of the graph-limit equation."""

    @staticmethod
    def eval_psi(
        cell_index: int,
        xgrid: GridFunction,
        mgrid: GridFunction,
        kernel: InfluenceKernel,
        sign: SignMap,
    ) -> float:
        """
        Psi at one cell, as the literal double sum over cells (s*, s**) weighted by K^{-2d}.

        Args:
            cell_index: 0-based flat index of the cell containing s, first index fastest.
                This is CubeLabeling.label(multi_index) - 1 and what CubeLabeling.cell_of(s) returns
            xgrid: Opinion grid x(.)
            mgrid: Mass grid m(.)

        Raises:
            ContractError: If the grids disagree in dimension or resolution, or the index is out of range
        """
        xgrid.require_compatible(mgrid)
        state = grids_to_state(xgrid, mgrid)
        if not 0 <= cell_index < state.count:
            msg = f"cell index {cell_index} outside 0..{state.count - 1}"
            raise ContractError(msg)

        positions, masses = state.positions, state.masses
        own = positions[cell_index]
        # [j, k] = a(x_k - x_i) + a(x_k - x_j) with i the evaluated cell
        summand = kernel.evaluate(positions - own)[None, :, :] + kernel.evaluate(Dynamics.pair_differences(positions))
        directions = sign.evaluate(own - positions)  # [j] = s(x_i - x_j)
        projected = np.sum(summand * directions[:, None, :], axis=-1)
        weights = masses[:, None] * masses[None, :]
        return float(masses[cell_index] * np.sum(weights * projected) / (2.0 * state.count * state.count))

    @staticmethod
    def grid_rhs(
        xgrid: GridFunction,
        mgrid: GridFunction,
        kernel: InfluenceKernel,
        sign: SignMap,
    ) -> tuple[GridFunction, GridFunction]:
        """
        Both time derivatives of the graph-limit equation on the grid.

        Returns:
            (x-derivative grid of shape (K^d, d), m-derivative grid of shape (K^d,))
        """
        state = grids_to_state(xgrid, mgrid)
        velocities, rates = Dynamics.rates(state.positions, state.masses, kernel, sign)
        return GridFunction(xgrid.dim, xgrid.resolution, velocities), GridFunction(xgrid.dim, xgrid.resolution, rates)

    @staticmethod
    def check_initial_data(x0grid: GridFunction, m0grid: GridFunction, tolerance: float = 1e-8) -> None:
        """
        Check the well-posedness hypotheses on initial grids.

        d = 1: cell values strictly increasing. d > 1: cell values pairwise distinct
        (the sampled shadow of a bi-Lipschitz map). Masses positive with unit integral.

        Raises:
            PreconditionError: If the opinion grid is not injective / increasing
            ContractError: If the mass grid is invalid
        """
        x0grid.require_compatible(m0grid)
        m0grid.check_mass(tolerance)
        state = grids_to_state(x0grid, m0grid)
        if state.dim == 1:
            if state.count > 1 and not np.all(np.diff(state.positions[:, 0]) > 0):
                msg = "initial opinion grid must be strictly increasing in d = 1"
                raise PreconditionError(msg)
        elif state.min_pair_distance() <= 0.0:
            msg = "initial opinion grid must take distinct values"
            raise PreconditionError(msg)

    @staticmethod
    def solve_direct(
        x0grid: GridFunction,
        m0grid: GridFunction,
        cfg: IntegratorConfig,
        kernel: InfluenceKernel,
        sign: SignMap,
        horizon: float,
        *,
        freeze_masses: bool = False,
    ) -> ContinuumTrajectory:
        """
        March grid_rhs with the configured scheme over [0, horizon].

        With freeze_masses the mass grid is held fixed, which solves the decoupled
        opinion equation for the frozen density m0.

        Raises:
            PreconditionError: If the initial data violate the hypotheses
            CollapseError: If a cell mass becomes non-positive
        """
        GraphLimit.check_initial_data(x0grid, m0grid)
        state = grids_to_state(x0grid, m0grid)
        trajectory = Integrator.march(state, cfg, kernel, sign, horizon, freeze_masses=freeze_masses)
        logger.info("direct graph-limit solve: K=%d, d=%d, %d samples", x0grid.resolution, x0grid.dim, trajectory.times.size)
        return ContinuumTrajectory(
            x0grid.dim, x0grid.resolution, trajectory.times, trajectory.positions, trajectory.masses
        )
