"""
dynamics module - Particle state and right-hand sides of the pairwise competition model

    dx_i/dt = (1/P) sum_j m_j a(x_j - x_i)
    dm_i/dt = (1/P) sum_j m_i m_j <(dx_i/dt + dx_j/dt)/2, s(x_i - x_j)>

The weight equation is evaluated in the factorised O(P^2) form that reuses the
velocities, with the literal O(P^3) double sum kept as an oracle. All reductions
run over the pair axis with numpy's fixed summation order (no BLAS), so results
are bitwise reproducible. Every function accepts leading batch axes
(positions of shape (..., P, d), masses of shape (..., P)), which the Picard
solvers use to evaluate a whole time grid at once.

This module is licensed under the MIT License.
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike

from pairwise_graphlimit.errors import ContractError, PreconditionError
from pairwise_graphlimit.kernels import FloatArray, InfluenceKernel, SignMap

MASS_TOLERANCE = 1e-8


def perfect_root(count: int, dim: int) -> int:
    """
    Return N with N**dim == count.

    Raises:
        PreconditionError: If count is not a perfect dim-th power
    """
    if count < 1 or dim < 1:
        msg = f"count and dim must be positive, got count={count}, dim={dim}"
        raise PreconditionError(msg)
    side = round(count ** (1.0 / dim))
    for candidate in (side - 1, side, side + 1):
        if candidate >= 1 and candidate**dim == count:
            return candidate
    msg = f"particle count {count} is not a perfect power of dimension {dim}"
    raise PreconditionError(msg)


@dataclass(frozen=True)
class DiscreteState:
    """
    Positions and masses of P = N^d particles at one time.

    Attributes:
        time: t >= 0
        positions: Array of shape (P, d)
        masses: Array of shape (P,)
        side: N, recorded from the particle count
    """

    time: float
    positions: FloatArray
    masses: FloatArray
    side: int = field(init=False)

    def __post_init__(self) -> None:
        positions = np.array(self.positions, dtype=np.float64)
        masses = np.array(self.masses, dtype=np.float64)
        if positions.ndim == 1:
            positions = positions[:, None]
        if positions.ndim != 2 or masses.ndim != 1 or positions.shape[0] != masses.shape[0]:
            msg = f"positions (P, d) and masses (P,) disagree: {positions.shape} vs {masses.shape}"
            raise ContractError(msg)
        if self.time < 0:
            msg = f"time must be non-negative, got {self.time}"
            raise ContractError(msg)
        if not (np.all(np.isfinite(positions)) and np.all(np.isfinite(masses))):
            msg = "state contains non-finite values"
            raise ContractError(msg)
        positions.setflags(write=False)
        masses.setflags(write=False)
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "side", perfect_root(masses.shape[0], positions.shape[1]))

    @classmethod
    def create(cls, positions: ArrayLike, masses: ArrayLike, time: float = 0.0) -> "DiscreteState":
        """Build a state and check the model invariants (positive masses, unit mean mass)."""
        state = cls(time=time, positions=np.asarray(positions), masses=np.asarray(masses))
        state.validate()
        return state

    @property
    def count(self) -> int:
        """P."""
        return int(self.masses.shape[0])

    @property
    def dim(self) -> int:
        """d."""
        return int(self.positions.shape[1])

    def mean_mass(self) -> float:
        return float(np.mean(self.masses))

    def validate(self, tolerance: float = MASS_TOLERANCE) -> None:
        """
        Check positivity and unit mean of the masses.

        Raises:
            ContractError: If a mass is non-positive or the mean mass is not 1
        """
        if np.any(self.masses <= 0):
            index = int(np.argmax(self.masses <= 0))
            msg = f"mass {index} is not positive: {self.masses[index]}"
            raise ContractError(msg)
        deviation = abs(self.mean_mass() - 1.0)
        if deviation > tolerance:
            msg = f"mean mass deviates from 1 by {deviation:.3e}"
            raise ContractError(msg)

    def with_values(self, time: float, positions: FloatArray, masses: FloatArray) -> "DiscreteState":
        return DiscreteState(time=time, positions=positions, masses=masses)

    def min_pair_distance(self) -> float:
        """Smallest distance between two distinct particles (inf for P = 1)."""
        return Dynamics.min_pair_distance(self.positions)


class Dynamics:
    """
    Right-hand sides of the particle system.

    The methods are pure functions of their array arguments; the state-level
    wrappers (rhs_positions, rhs_masses, rhs_masses_bruteforce) follow the
    operation names of the model, the array-level ones (velocities,
    mass_rates, ...) are shared with the continuum solvers.
    """

    @staticmethod
    def pair_differences(positions: FloatArray) -> FloatArray:
        """D[..., i, j, :] = x_j - x_i."""
        return positions[..., None, :, :] - positions[..., :, None, :]

    @staticmethod
    def velocities(positions: FloatArray, masses: FloatArray, kernel: InfluenceKernel) -> FloatArray:
        """(1/P) sum_j m_j a(x_j - x_i) for every i (batched)."""
        count = masses.shape[-1]
        influence = kernel.evaluate(Dynamics.pair_differences(positions))
        return np.sum(influence * masses[..., None, :, None], axis=-2) / count

    @staticmethod
    def mass_rates(
        positions: FloatArray,
        masses: FloatArray,
        velocities: FloatArray,
        sign: SignMap,
    ) -> FloatArray:
        """
        Factorised weight derivative (batched).

        Uses (1/(2P^2)) sum_{j,k} m_j m_k (a(x_k - x_i) + a(x_k - x_j)) = (1/(2P)) sum_j m_j (v_i + v_j).
        """
        count = masses.shape[-1]
        # s(x_i - x_j) = -s(x_j - x_i) by oddness
        directions = -sign.evaluate(Dynamics.pair_differences(positions))
        pair_velocity = velocities[..., :, None, :] + velocities[..., None, :, :]
        projected = np.sum(pair_velocity * directions, axis=-1)
        weighted = np.sum(projected * masses[..., None, :], axis=-1)
        return masses * weighted / (2.0 * count)

    @staticmethod
    def mass_rates_bruteforce(
        positions: FloatArray,
        masses: FloatArray,
        kernel: InfluenceKernel,
        sign: SignMap,
    ) -> FloatArray:
        """Literal triple loop cost O(P^3): (1/(2P^2)) m_i sum_{j,k} m_j m_k (a(x_k-x_i) + a(x_k-x_j))·s(x_i-x_j)."""
        count = masses.shape[0]
        differences = Dynamics.pair_differences(positions)
        influence = kernel.evaluate(differences)  # [j, k] = a(x_k - x_j)
        directions = -sign.evaluate(differences)  # [i, j] = s(x_i - x_j)
        weights = masses[:, None] * masses[None, :]  # [j, k] = m_j m_k
        rates = np.empty(count)
        for i in range(count):
            summand = influence[i][None, :, :] + influence  # [j, k] = a(x_k - x_i) + a(x_k - x_j)
            projected = np.sum(summand * directions[i][:, None, :], axis=-1)
            rates[i] = masses[i] * np.sum(weights * projected) / (2.0 * count * count)
        return rates

    @staticmethod
    def rates(
        positions: FloatArray,
        masses: FloatArray,
        kernel: InfluenceKernel,
        sign: SignMap,
        *,
        freeze_masses: bool = False,
    ) -> tuple[FloatArray, FloatArray]:
        """Both derivatives; with freeze_masses the weight derivative is zero."""
        velocities = Dynamics.velocities(positions, masses, kernel)
        if freeze_masses:
            return velocities, np.zeros_like(masses)
        return velocities, Dynamics.mass_rates(positions, masses, velocities, sign)

    @staticmethod
    def min_pair_distance(positions: FloatArray) -> float:
        count = positions.shape[0]
        if count < 2:
            return float("inf")
        distances = np.sqrt(np.sum(Dynamics.pair_differences(positions) ** 2, axis=-1))
        upper = np.triu_indices(count, k=1)
        return float(np.min(distances[upper]))


def rhs_positions(state: DiscreteState, kernel: InfluenceKernel) -> FloatArray:
    """
    Opinion velocities dx_i/dt of a state.

    Examples:
        >>> s = DiscreteState.create([[-1.0], [1.0]], [1.5, 0.5])
        >>> rhs_positions(s, InfluenceKernel.linear())   # [[0.5], [-1.5]]
    """
    return Dynamics.velocities(state.positions, state.masses, kernel)


def rhs_masses(state: DiscreteState, velocities: ArrayLike, sign: SignMap) -> FloatArray:
    """
    Weight derivatives dm_i/dt of a state, given its velocities.

    Raises:
        ContractError: If velocities do not match the state's shape

    Examples:
        >>> v = rhs_positions(s, InfluenceKernel.linear())
        >>> rhs_masses(s, v, SignMap(1))                  # [0.1875, -0.1875]
    """
    velocity_array = np.asarray(velocities, dtype=np.float64)
    if velocity_array.shape != state.positions.shape:
        msg = f"velocities shape {velocity_array.shape} does not match positions {state.positions.shape}"
        raise ContractError(msg)
    return Dynamics.mass_rates(state.positions, state.masses, velocity_array, sign)


def rhs_masses_bruteforce(state: DiscreteState, kernel: InfluenceKernel, sign: SignMap) -> FloatArray:
    """Weight derivatives by the literal O(P^3) double sum; oracle for rhs_masses."""
    return Dynamics.mass_rates_bruteforce(state.positions, state.masses, kernel, sign)
