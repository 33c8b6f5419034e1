"""
meanfield module - Weighted atomic measures and Wasserstein-1 distances

The particle system defines the empirical measure mu_N = (1/P) sum_j m_j delta_{x_j}
and a continuum solution the push-forward mu = int m(s) delta_{x(s)} ds, which on a
K^d grid is again atomic. Both carry unit mass because the mean mass is 1.

W1 is computed two ways: exactly in d = 1 from the integrated CDF difference, and
in any dimension as the value of the discrete transport problem with Euclidean
ground cost, solved by POT's network simplex.

This module is licensed under the MIT License.
"""

import logging
from dataclasses import dataclass

import numpy as np
import ot
from numpy.typing import ArrayLike

from pairwise_graphlimit.dynamics import DiscreteState
from pairwise_graphlimit.errors import CapacityError, ContractError, SolverError
from pairwise_graphlimit.grid import GridFunction, grids_to_state
from pairwise_graphlimit.kernels import FloatArray

logger = logging.getLogger(__name__)

MASS_TOLERANCE = 1e-10
MAX_TRANSPORT_ATOMS = 10_000
TRANSPORT_ITERATIONS = 10_000_000


@dataclass(frozen=True)
class AtomicMeasure:
    """
    A finite positive measure sum_k w_k delta_{y_k} of unit total mass.

    Attributes:
        locations: Shape (n, d)
        weights: Shape (n,), positive
    """

    locations: FloatArray
    weights: FloatArray

    def __post_init__(self) -> None:
        locations = np.array(self.locations, dtype=np.float64)
        weights = np.array(self.weights, dtype=np.float64)
        if locations.ndim == 1:
            locations = locations[:, None]
        if locations.ndim != 2 or weights.ndim != 1 or locations.shape[0] != weights.shape[0]:
            msg = f"locations (n, d) and weights (n,) disagree: {locations.shape} vs {weights.shape}"
            raise ContractError(msg)
        if weights.size == 0 or np.any(weights <= 0):
            msg = "atom weights must be positive"
            raise ContractError(msg)
        if abs(float(np.sum(weights)) - 1.0) > MASS_TOLERANCE:
            msg = f"total weight {float(np.sum(weights)):.15g} is not 1"
            raise ContractError(msg)
        locations.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "locations", locations)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def create(cls, locations: ArrayLike, weights: ArrayLike) -> "AtomicMeasure":
        return cls(np.asarray(locations, dtype=np.float64), np.asarray(weights, dtype=np.float64))

    @property
    def dim(self) -> int:
        return int(self.locations.shape[1])

    @property
    def size(self) -> int:
        return int(self.weights.shape[0])

    @property
    def total(self) -> float:
        return float(np.sum(self.weights))


class MeanField:
    """Measures attached to particle states and grids, and the distances between them."""

    @staticmethod
    def empirical_measure(state: DiscreteState) -> AtomicMeasure:
        """
        Atoms (x_j, m_j / P).

        Examples:
            >>> MeanField.empirical_measure(DiscreteState.create([[0.0], [1.0]], [1.5, 0.5])).weights
            array([0.75, 0.25])
        """
        return AtomicMeasure(state.positions, state.masses / state.count)

    @staticmethod
    def continuum_measure(xgrid: GridFunction, mgrid: GridFunction) -> AtomicMeasure:
        """One atom per cell at x(cell) with weight m(cell)·K^{-d}."""
        return MeanField.empirical_measure(grids_to_state(xgrid, mgrid))

    @staticmethod
    def _require_comparable(mu: AtomicMeasure, nu: AtomicMeasure) -> None:
        if mu.dim != nu.dim:
            msg = f"measures live in different dimensions: {mu.dim} vs {nu.dim}"
            raise ContractError(msg)
        if abs(mu.total - nu.total) > MASS_TOLERANCE:
            msg = f"measures have unequal total mass: {mu.total:.15g} vs {nu.total:.15g}"
            raise ContractError(msg)

    @staticmethod
    def w1_1d(mu: AtomicMeasure, nu: AtomicMeasure) -> float:
        """
        Exact W1 on the line: the integral of |F_mu - F_nu| between consecutive atoms.

        Raises:
            ContractError: If either measure is not one-dimensional or the masses differ

        Examples:
            >>> MeanField.w1_1d(AtomicMeasure.create([0.0, 2.0], [0.5, 0.5]), AtomicMeasure.create([1.0], [1.0]))
            1.0
        """
        MeanField._require_comparable(mu, nu)
        if mu.dim != 1:
            msg = "w1_1d needs one-dimensional measures"
            raise ContractError(msg)
        u_values, v_values = mu.locations[:, 0], nu.locations[:, 0]
        u_order, v_order = np.argsort(u_values), np.argsort(v_values)

        breakpoints = np.sort(np.concatenate((u_values, v_values)), kind="mergesort")
        gaps = np.diff(breakpoints)
        u_cumulative = np.concatenate(([0.0], np.cumsum(mu.weights[u_order])))
        v_cumulative = np.concatenate(([0.0], np.cumsum(nu.weights[v_order])))
        u_cdf = u_cumulative[u_values[u_order].searchsorted(breakpoints[:-1], "right")]
        v_cdf = v_cumulative[v_values[v_order].searchsorted(breakpoints[:-1], "right")]
        return float(np.sum(np.abs(u_cdf - v_cdf) * gaps))

    @staticmethod
    def w1_discrete(mu: AtomicMeasure, nu: AtomicMeasure) -> float:
        """
        Exact W1 as the optimal value of the transport problem with Euclidean cost.

        Raises:
            CapacityError: If the two measures together have more than 10^4 atoms
            ContractError: If dimensions or masses differ
            SolverError: If the network simplex stops before optimality
        """
        MeanField._require_comparable(mu, nu)
        atoms = mu.size + nu.size
        if atoms > MAX_TRANSPORT_ATOMS:
            msg = f"{atoms} atoms exceed the exact transport limit of {MAX_TRANSPORT_ATOMS}; subsample first"
            raise CapacityError(msg)
        source = np.ascontiguousarray(mu.weights)
        # equal totals to machine precision, as the simplex requires
        target = np.ascontiguousarray(nu.weights * (source.sum() / nu.weights.sum()))
        cost = ot.dist(mu.locations, nu.locations, metric="euclidean")
        value, log = ot.emd2(source, target, cost, numItermax=TRANSPORT_ITERATIONS, log=True)
        if log.get("warning"):
            msg = f"exact transport did not reach optimality: {log['warning']}"
            raise SolverError(msg)
        logger.debug("w1_discrete over %d x %d atoms: %.6e", mu.size, nu.size, value)
        return float(value)

    @staticmethod
    def w1(mu: AtomicMeasure, nu: AtomicMeasure) -> float:
        """w1_1d on the line, w1_discrete otherwise."""
        return MeanField.w1_1d(mu, nu) if mu.dim == 1 else MeanField.w1_discrete(mu, nu)
