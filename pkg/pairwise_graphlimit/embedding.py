"""
embedding module - Projection of initial data, step-function embeddings, convergence functionals

    project_initial: x_i = N^d int_{Q_i} x0,  m_i = N^d int_{Q_i} m0   (tensor Gauss-Legendre per cell)
    riemann_embed:   the particle arrays read as step functions on the N^d grid
    xi_zeta:         distances between an embedded solution and a finer reference
    gn_diagnostic:   || N^d int_{cell(s)} Psi - Psi(s) ||, the averaging defect of Psi

Norms follow the dimension: squared L2 on I when d = 1 and L1 on I^d when d >= 2.
Squared L2 is also valid in d >= 3 and may be requested there; it is never
allowed in d = 2. Every norm is an exact cell sum on the finer grid.

This module is licensed under the MIT License.
"""

import csv
import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum
from functools import cache
from itertools import pairwise
from pathlib import Path
from typing import Any

import numpy as np
from numpy.polynomial.legendre import leggauss

from pairwise_graphlimit.dynamics import DiscreteState
from pairwise_graphlimit.errors import ContractError, QuadratureError
from pairwise_graphlimit.graph_limit import GraphLimit
from pairwise_graphlimit.grid import ContinuumTrajectory, GridFunction, grids_to_state, state_to_grids
from pairwise_graphlimit.kernels import FloatArray, InfluenceKernel, SignMap
from pairwise_graphlimit.labeling import CubeLabeling

__all__ = [
    "CubeLabeling",
    "ConvergenceReport",
    "ConvergenceRow",
    "Embedding",
    "InitialFunction",
    "NormKind",
]

logger = logging.getLogger(__name__)

# f(s) for s of shape (n, d); returns (n, d) for opinions or (n,) for masses
InitialFunction = Callable[[FloatArray], FloatArray]


class NormKind(Enum):
    """Norm used by the convergence functionals."""

    L2_SQUARED = "l2-squared"
    L1 = "l1"

    @classmethod
    def default_for(cls, dim: int) -> "NormKind":
        return cls.L2_SQUARED if dim == 1 else cls.L1

    def check(self, dim: int) -> None:
        """
        Raises:
            ContractError: For squared L2 in d = 2, where the bound it measures is not available
        """
        if self is NormKind.L2_SQUARED and dim == 2:
            msg = "the squared L2 functional is not available in d = 2; use l1"
            raise ContractError(msg)

    def measure(self, difference: FloatArray) -> float:
        """Norm of a cell-value difference (each cell weighted by 1/cells)."""
        magnitude = np.linalg.norm(difference, axis=-1) if difference.ndim == 2 else np.abs(difference)
        if self is NormKind.L2_SQUARED:
            return float(np.mean(magnitude**2))
        return float(np.mean(magnitude))


@cache
def _tensor_rule(points: int, dim: int) -> tuple[FloatArray, FloatArray]:
    """Gauss-Legendre nodes on [0, 1]^d, shape (points^d, d), and weights summing to 1."""
    nodes, weights = leggauss(points)
    nodes = 0.5 * (nodes + 1.0)
    weights = 0.5 * weights
    grids = np.meshgrid(*([nodes] * dim), indexing="ij")
    weight_grids = np.meshgrid(*([weights] * dim), indexing="ij")
    offsets = np.stack([g.ravel() for g in grids], axis=-1)
    products = np.prod(np.stack([w.ravel() for w in weight_grids], axis=-1), axis=-1)
    return offsets, products


class Embedding:
    """Conversions between particle states, step functions and continuum data."""

    GAUSS_POINTS = 5
    CHECK_POINTS = 8
    QUADRATURE_TOLERANCE = 1e-6

    @staticmethod
    def cell_averages(func: InitialFunction, dim: int, side: int, points: int = GAUSS_POINTS) -> FloatArray:
        """
        N^d int_{Q_i} func for every cell, in labelling order.

        Returns:
            Shape (N^d,) or (N^d, k) following func's output
        """
        labeling = CubeLabeling(dim, side)
        offsets, weights = _tensor_rule(points, dim)
        samples = labeling.cell_lower_corners()[:, None, :] + offsets[None, :, :] / side
        values = np.asarray(func(samples.reshape(-1, dim)), dtype=np.float64)
        values = values.reshape(labeling.size, offsets.shape[0], *values.shape[1:])
        return np.tensordot(weights, values, axes=([0], [1]))

    @staticmethod
    def _checked_averages(func: InitialFunction, dim: int, side: int) -> FloatArray:
        coarse = Embedding.cell_averages(func, dim, side, Embedding.GAUSS_POINTS)
        fine = Embedding.cell_averages(func, dim, side, Embedding.CHECK_POINTS)
        error = float(np.max(np.abs(coarse - fine)))
        if not np.isfinite(error) or error > Embedding.QUADRATURE_TOLERANCE:
            msg = f"cell quadrature did not converge at N={side}: {Embedding.GAUSS_POINTS}- and {Embedding.CHECK_POINTS}-point rules differ by {error:.3e}"
            raise QuadratureError(msg)
        return fine

    @staticmethod
    def project_grids(x0: InitialFunction, m0: InitialFunction, dim: int, side: int) -> tuple[GridFunction, GridFunction]:
        """
        Cell averages of the initial data as grids at resolution N.

        Raises:
            QuadratureError: If the cell quadrature fails its refinement check
            ContractError: If an average has the wrong shape or masses are invalid
        """
        positions = Embedding._checked_averages(x0, dim, side)
        if positions.ndim == 1:
            positions = positions[:, None]
        if positions.shape[-1] != dim:
            msg = f"x0 returns {positions.shape[-1]} components in dimension {dim}"
            raise ContractError(msg)
        masses = Embedding._checked_averages(m0, dim, side)
        if masses.ndim != 1:
            msg = "m0 must be scalar valued"
            raise ContractError(msg)
        xgrid = GridFunction(dim, side, positions)
        mgrid = GridFunction(dim, side, masses)
        mgrid.check_mass(Embedding.QUADRATURE_TOLERANCE)
        return xgrid, mgrid

    @staticmethod
    def project_initial(x0: InitialFunction, m0: InitialFunction, dim: int, side: int) -> DiscreteState:
        """
        The P = N^d particle state at t = 0 carrying the cell averages of (x0, m0).

        Examples:
            >>> Embedding.project_initial(lambda s: s, lambda s: np.ones(len(s)), 1, 4).positions[:, 0]
            array([0.125, 0.375, 0.625, 0.875])
        """
        xgrid, mgrid = Embedding.project_grids(x0, m0, dim, side)
        return grids_to_state(xgrid, mgrid)

    @staticmethod
    def riemann_embed(state: DiscreteState, labeling: CubeLabeling) -> tuple[GridFunction, GridFunction]:
        """
        The step functions x_N(s) = x_{sigma(i)} and m_N(s) = m_{sigma(i)} for s in Q_i.

        Raises:
            ContractError: If P != N^d or the dimensions differ
        """
        if state.count != labeling.size or state.dim != labeling.dim:
            msg = f"state with P={state.count}, d={state.dim} does not fit a {labeling.side}^{labeling.dim} labelling"
            raise ContractError(msg)
        return state_to_grids(state)

    @staticmethod
    def xi_zeta(
        embedded: tuple[GridFunction, GridFunction],
        reference: tuple[GridFunction, GridFunction],
        norm: NormKind | None = None,
    ) -> tuple[float, float]:
        """
        (xi_N, zeta_N): opinion and mass distances between an embedded pair and a reference pair.

        The embedded grids are refined to the reference resolution first.

        Raises:
            ContractError: If the reference resolution is not a multiple of the embedded one
        """
        xgrid, mgrid = embedded
        x_ref, m_ref = reference
        xgrid.require_compatible(mgrid)
        x_ref.require_compatible(m_ref)
        kind = norm or NormKind.default_for(xgrid.dim)
        kind.check(xgrid.dim)
        if x_ref.dim != xgrid.dim:
            msg = "embedded and reference grids differ in dimension"
            raise ContractError(msg)
        x_fine = xgrid.refine(x_ref.resolution)
        m_fine = mgrid.refine(m_ref.resolution)
        return kind.measure(x_fine.values - x_ref.values), kind.measure(m_fine.values - m_ref.values)

    @staticmethod
    def gn_diagnostic(
        reference: ContinuumTrajectory,
        side: int,
        t: float,
        kernel: InfluenceKernel,
        sign: SignMap,
        norm: NormKind | None = None,
    ) -> float:
        """
        Norm of g_N(t, s) = N^d int_{cell_N(s)} Psi(s*) ds* - Psi(s), with Psi taken from the reference at time t.

        Raises:
            ContractError: If N does not divide the reference resolution
        """
        kind = norm or NormKind.default_for(reference.dim)
        kind.check(reference.dim)
        xgrid, mgrid = reference.grids_at(t)
        _, psi = GraphLimit.grid_rhs(xgrid, mgrid, kernel, sign)
        averaged = psi.coarsen(side).refine(reference.resolution)
        return kind.measure(averaged.values - psi.values)


@dataclass(frozen=True)
class ConvergenceRow:
    side: int
    t: float
    xi: float
    zeta: float
    gn: float
    w1: float


@dataclass
class ConvergenceReport:
    """
    Convergence functionals per refinement level and recorded time.

    Attributes:
        dim: d
        norm: Norm used for xi, zeta and g_N
        rows: One row per (N, t)
    """

    dim: int
    norm: NormKind
    rows: list[ConvergenceRow] = field(default_factory=list)

    CSV_HEADER = ("N", "t", "xi", "zeta", "gn", "w1")

    def add(self, row: ConvergenceRow) -> None:
        for value in (row.xi, row.zeta, row.gn, row.w1):
            if not value >= 0:
                msg = f"convergence entries must be >= 0, got {row}"
                raise ContractError(msg)
        self.rows.append(row)

    @property
    def levels(self) -> list[int]:
        return sorted({row.side for row in self.rows})

    def series(self, side: int) -> list[ConvergenceRow]:
        return sorted((row for row in self.rows if row.side == side), key=lambda row: row.t)

    def sup_error(self, side: int) -> float:
        """sup_t (xi_N + zeta_N)."""
        return max(row.xi + row.zeta for row in self.series(side))

    def sup_gn(self, side: int) -> float:
        return max(row.gn for row in self.series(side))

    def sup_w1(self, side: int) -> float:
        return max(row.w1 for row in self.series(side))

    @staticmethod
    def _decay(values: list[float]) -> list[float]:
        return [later / earlier if earlier > 0 else 0.0 for earlier, later in pairwise(values)]

    @staticmethod
    def strictly_decreasing(values: list[float]) -> bool:
        return all(later < earlier for earlier, later in pairwise(values))

    def empirical_rates(self, values: list[float]) -> list[float]:
        """log2 of successive error ratios (levels are assumed to double)."""
        rates = []
        for (n0, e0), (n1, e1) in pairwise(zip(self.levels, values, strict=True)):
            rates.append(float(np.log(e0 / e1) / np.log(n1 / n0)) if e0 > 0 and e1 > 0 else float("nan"))
        return rates

    def summary(self) -> dict[str, Any]:
        """Per-level suprema over t, decay ratios and empirical rates."""
        errors = [self.sup_error(n) for n in self.levels]
        gns = [self.sup_gn(n) for n in self.levels]
        w1s = [self.sup_w1(n) for n in self.levels]
        return {
            "dim": self.dim,
            "norm": self.norm.value,
            "levels": self.levels,
            "sup_xi_plus_zeta": errors,
            "sup_gn": gns,
            "sup_w1": w1s,
            "decay_ratios": self._decay(errors),
            "empirical_rates": self.empirical_rates(errors),
            "strictly_decreasing": self.strictly_decreasing(errors),
            "gn_strictly_decreasing": self.strictly_decreasing(gns),
        }

    def write_csv(self, path: Path) -> None:
        with Path(path).open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(self.CSV_HEADER)
            for row in sorted(self.rows, key=lambda r: (r.side, r.t)):
                writer.writerow([row.side, repr(row.t), repr(row.xi), repr(row.zeta), repr(row.gn), repr(row.w1)])
