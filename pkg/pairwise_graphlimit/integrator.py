"""
integrator module - Time marching of the particle system and invariant monitoring

Fixed-step RK4 (default) or explicit Euler. Because opinions stay separated, the
right-hand side is smooth along trajectories and no event location is needed; a
collision floor stops a run before it could reach the discontinuity of s.

The monitors follow the basic properties of solutions:
- mean mass stays 1
- |x_i(t)| <= X·e^{2LT}
- m_i0·e^{-rate·t} <= m_i(t) <= m_i0·e^{rate·t} with rate = 2·L·S_inf·X·e^{2LT}
- |x_i(t) - x_j(t)|^2·e^{2Lt} >= |x_i0 - x_j0|^2

This module is licensed under the MIT License.
"""

import csv
import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from pairwise_graphlimit.dynamics import DiscreteState, Dynamics
from pairwise_graphlimit.errors import CollapseError, ContractError, PreconditionError
from pairwise_graphlimit.kernels import FloatArray, InfluenceKernel, ModelParams, SignMap

logger = logging.getLogger(__name__)


class IntegratorScheme(Enum):
    """Fixed-step time integration schemes."""

    RK4 = "rk4-fixed"
    EULER = "euler"


@dataclass(frozen=True)
class IntegratorConfig:
    """
    Time integration settings.

    Attributes:
        scheme: RK4 or EULER
        dt: Time step
        record_every: Record one sample every this many steps
        min_separation: Collision floor; a run halts when two particles come closer
        mass_tolerance: Allowed |mean mass - 1|
        envelope_tolerance: Relative slack on the weight envelopes
        position_tolerance: Absolute slack on the opinion bound
        separation_tolerance: Allowed shortfall of the separation ratio below 1
    """

    scheme: IntegratorScheme = IntegratorScheme.RK4
    dt: float = 1e-3
    record_every: int = 1
    min_separation: float = 1e-9
    mass_tolerance: float = 1e-10
    envelope_tolerance: float = 1e-9
    position_tolerance: float = 1e-8
    separation_tolerance: float = 1e-6

    def __post_init__(self) -> None:
        object.__setattr__(self, "scheme", IntegratorScheme(self.scheme))
        if not (math.isfinite(self.dt) and self.dt > 0):
            msg = f"dt must be positive, got {self.dt}"
            raise ContractError(msg)
        if self.record_every < 1:
            msg = f"record_every must be >= 1, got {self.record_every}"
            raise ContractError(msg)

    def step_count(self, horizon: float) -> int:
        """
        Number of steps covering [0, horizon].

        Raises:
            ContractError: If dt exceeds the horizon or does not divide it
        """
        if self.dt > horizon * (1.0 + 1e-12):
            msg = f"dt={self.dt} exceeds the horizon {horizon}"
            raise ContractError(msg)
        steps = round(horizon / self.dt)
        if abs(steps * self.dt - horizon) > 1e-9 * max(1.0, horizon):
            msg = f"dt={self.dt} does not divide the horizon {horizon}"
            raise ContractError(msg)
        return int(steps)


@dataclass(frozen=True)
class Trajectory:
    """
    Recorded samples of a particle (or cell) trajectory.

    Attributes:
        times: Shape (R,)
        positions: Shape (R, P, d)
        masses: Shape (R, P)
        halted: True when the run stopped at the collision floor
    """

    times: FloatArray
    positions: FloatArray
    masses: FloatArray
    halted: bool = False

    def __post_init__(self) -> None:
        for name in ("times", "positions", "masses"):
            array = np.array(getattr(self, name), dtype=np.float64)
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    @property
    def dim(self) -> int:
        return int(self.positions.shape[-1])

    @property
    def count(self) -> int:
        return int(self.masses.shape[-1])

    def index_of(self, t: float, tolerance: float = 1e-9) -> int:
        """
        Index of the recorded sample at time t.

        Raises:
            ContractError: If t is not a recorded time
        """
        matches = np.flatnonzero(np.abs(self.times - t) <= tolerance * max(1.0, abs(t)))
        if matches.size == 0:
            msg = f"time {t} is not a recorded sample"
            raise ContractError(msg)
        return int(matches[0])

    def state_at(self, t: float) -> DiscreteState:
        index = self.index_of(t)
        return DiscreteState(time=float(self.times[index]), positions=self.positions[index], masses=self.masses[index])

    def final_state(self) -> DiscreteState:
        return DiscreteState(time=float(self.times[-1]), positions=self.positions[-1], masses=self.masses[-1])

    def write_csv(self, path: Path) -> None:
        """Write rows 't, i, x_1..x_d, m' (i is the 1-based flat index)."""
        header = ["t", "i", *[f"x_{k + 1}" for k in range(self.dim)], "m"]
        with Path(path).open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            for r, t in enumerate(self.times):
                for i in range(self.count):
                    writer.writerow([repr(float(t)), i + 1, *map(repr, self.positions[r, i].tolist()), repr(float(self.masses[r, i]))])


@dataclass(frozen=True)
class InvariantRecord:
    """Monitor values at one recorded time."""

    t: float
    mass_dev: float
    min_env_ratio: float
    min_env_ratio_unscaled: float
    max_pos_ratio: float
    sep_ratio: float
    ordered: bool


@dataclass
class InvariantLog:
    """
    One InvariantRecord per recorded step plus the empirical separation constant.

    Ratios are normalised so that values >= 1 (for envelope and separation) or
    <= 1 (for the position bound) mean the corresponding bound holds.
    """

    records: list[InvariantRecord] = field(default_factory=list)
    empirical_separation_constant: float = 1.0

    CSV_HEADER = ("t", "mass_dev", "min_env_ratio", "max_pos_ratio", "sep_ratio")

    def violations(self, cfg: IntegratorConfig) -> list[str]:
        """Describe every record breaking a monitored bound under cfg's tolerances."""
        problems = []
        for record in self.records:
            if record.mass_dev > cfg.mass_tolerance:
                problems.append(f"t={record.t:.6g}: mean mass deviation {record.mass_dev:.3e}")
            if record.min_env_ratio < 1.0 - cfg.envelope_tolerance:
                problems.append(f"t={record.t:.6g}: weight envelope ratio {record.min_env_ratio:.12g}")
            if record.max_pos_ratio > 1.0 + cfg.position_tolerance:
                problems.append(f"t={record.t:.6g}: opinion bound ratio {record.max_pos_ratio:.12g}")
            if record.sep_ratio < 1.0 - cfg.separation_tolerance:
                problems.append(f"t={record.t:.6g}: separation ratio {record.sep_ratio:.12g}")
            if not record.ordered:
                problems.append(f"t={record.t:.6g}: ordering of opinions lost")
        return problems

    def write_csv(self, path: Path) -> None:
        with Path(path).open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(self.CSV_HEADER)
            for record in self.records:
                writer.writerow(
                    [repr(record.t), repr(record.mass_dev), repr(record.min_env_ratio), repr(record.max_pos_ratio), repr(record.sep_ratio)]
                )


@dataclass(frozen=True)
class SimulationResult:
    """Output of Integrator.simulate."""

    trajectory: Trajectory
    log: InvariantLog
    diagnostic: str | None = None


RecordHook = Callable[[DiscreteState], None]


class Integrator:
    """
    Fixed-step integrator for the particle system.

    The same code path marches the continuum grid system (cells play the role of
    particles), which makes the grid and particle solutions bitwise identical for
    matching resolutions.
    """

    @staticmethod
    def _rk4(
        positions: FloatArray,
        masses: FloatArray,
        dt: float,
        kernel: InfluenceKernel,
        sign: SignMap,
        freeze_masses: bool,
    ) -> tuple[FloatArray, FloatArray]:
        kx1, km1 = Dynamics.rates(positions, masses, kernel, sign, freeze_masses=freeze_masses)
        kx2, km2 = Dynamics.rates(positions + 0.5 * dt * kx1, masses + 0.5 * dt * km1, kernel, sign, freeze_masses=freeze_masses)
        kx3, km3 = Dynamics.rates(positions + 0.5 * dt * kx2, masses + 0.5 * dt * km2, kernel, sign, freeze_masses=freeze_masses)
        kx4, km4 = Dynamics.rates(positions + dt * kx3, masses + dt * km3, kernel, sign, freeze_masses=freeze_masses)
        new_positions = positions + (dt / 6.0) * (kx1 + 2.0 * kx2 + 2.0 * kx3 + kx4)
        new_masses = masses + (dt / 6.0) * (km1 + 2.0 * km2 + 2.0 * km3 + km4)
        return new_positions, new_masses

    @staticmethod
    def step(
        state: DiscreteState,
        cfg: IntegratorConfig,
        kernel: InfluenceKernel,
        sign: SignMap,
        *,
        freeze_masses: bool = False,
    ) -> DiscreteState:
        """
        Advance a state by one step of cfg.dt.

        Raises:
            CollapseError: If a mass is non-positive after the step
        """
        if cfg.scheme == IntegratorScheme.RK4:
            positions, masses = Integrator._rk4(state.positions, state.masses, cfg.dt, kernel, sign, freeze_masses)
        else:
            velocities, rates = Dynamics.rates(state.positions, state.masses, kernel, sign, freeze_masses=freeze_masses)
            positions = state.positions + cfg.dt * velocities
            masses = state.masses + cfg.dt * rates

        time = state.time + cfg.dt
        if np.any(masses <= 0):
            index = int(np.argmax(masses <= 0))
            raise CollapseError(index, time, float(masses[index]))
        return state.with_values(time, positions, masses)

    @staticmethod
    def march(
        initial: DiscreteState,
        cfg: IntegratorConfig,
        kernel: InfluenceKernel,
        sign: SignMap,
        horizon: float,
        *,
        freeze_masses: bool = False,
        on_record: RecordHook | None = None,
    ) -> Trajectory:
        """
        Integrate from initial.time to initial.time + horizon, recording every cfg.record_every steps.

        The initial and final states are always recorded. When cfg.min_separation is
        positive and two particles come closer than it, the run stops and the returned
        trajectory is marked halted.
        """
        steps = cfg.step_count(horizon)
        times, positions, masses = [initial.time], [initial.positions], [initial.masses]
        if on_record is not None:
            on_record(initial)

        halted = False
        state = initial
        for n in range(1, steps + 1):
            state = Integrator.step(state, cfg, kernel, sign, freeze_masses=freeze_masses)
            halted = cfg.min_separation > 0 and state.min_pair_distance() < cfg.min_separation
            if halted or n % cfg.record_every == 0 or n == steps:
                times.append(state.time)
                positions.append(state.positions)
                masses.append(state.masses)
                if on_record is not None:
                    on_record(state)
            if halted:
                logger.warning("collision floor %.1e reached at t=%.6g; halting", cfg.min_separation, state.time)
                break

        logger.debug("marched %d particles over %d steps (%d samples)", initial.count, steps, len(times))
        return Trajectory(np.array(times), np.array(positions), np.array(masses), halted=halted)

    @staticmethod
    def _check_distinct(positions: FloatArray) -> None:
        if positions.shape[0] < 2:
            return
        distances = np.sqrt(np.sum(Dynamics.pair_differences(positions) ** 2, axis=-1))
        np.fill_diagonal(distances, np.inf)
        if np.any(distances == 0.0):
            i, j = np.argwhere(distances == 0.0)[0]
            msg = f"initial positions {i} and {j} coincide"
            raise PreconditionError(msg)

    @staticmethod
    def simulate(
        initial: DiscreteState,
        cfg: IntegratorConfig,
        kernel: InfluenceKernel,
        sign: SignMap,
        params: ModelParams,
        *,
        freeze_masses: bool = False,
    ) -> SimulationResult:
        """
        Integrate over [0, params.horizon] and monitor the invariants at each record.

        Raises:
            PreconditionError: If two initial positions coincide or |x0| exceeds params.pos_bound
            CollapseError: If a mass becomes non-positive
        """
        Integrator._check_distinct(initial.positions)
        initial.validate()
        if np.max(np.linalg.norm(initial.positions, axis=-1)) > params.pos_bound * (1.0 + 1e-12):
            msg = f"initial opinions exceed the declared bound X={params.pos_bound}"
            raise PreconditionError(msg)

        monitor = _InvariantMonitor(initial, params)
        trajectory = Integrator.march(
            initial, cfg, kernel, sign, params.horizon, freeze_masses=freeze_masses, on_record=monitor.record
        )
        diagnostic = None
        if trajectory.halted:
            diagnostic = (
                f"halted at t={trajectory.times[-1]:.6g}: minimum pair distance fell below {cfg.min_separation:.1e}"
            )
        logger.info(
            "simulated P=%d to t=%.6g; empirical separation constant %.6g",
            initial.count,
            trajectory.times[-1],
            monitor.log.empirical_separation_constant,
        )
        return SimulationResult(trajectory, monitor.log, diagnostic)

    @staticmethod
    def separation_ratio(trajectory: Trajectory, t: float, lip_a: float) -> float:
        """
        min over pairs of |x_i(t) - x_j(t)|^2·e^{2Lt} / |x_i0 - x_j0|^2.

        Returns:
            The ratio; inf for a single particle

        Raises:
            PreconditionError: If two initial positions coincide
            ContractError: If t is not a recorded time
        """
        index = trajectory.index_of(t)
        return _separation_ratio(trajectory.positions[0], trajectory.positions[index], float(trajectory.times[index]) - float(trajectory.times[0]), lip_a)


def _squared_gaps(positions: FloatArray) -> FloatArray:
    differences = Dynamics.pair_differences(positions)
    upper = np.triu_indices(positions.shape[0], k=1)
    return np.sum(differences**2, axis=-1)[upper]


def _separation_ratio(initial_positions: FloatArray, positions: FloatArray, elapsed: float, lip_a: float) -> float:
    if positions.shape[0] < 2:
        return math.inf
    initial_gaps = _squared_gaps(initial_positions)
    if np.any(initial_gaps == 0.0):
        msg = "separation ratio is undefined for coincident initial positions"
        raise PreconditionError(msg)
    gaps = _squared_gaps(positions)
    return float(np.min(gaps / initial_gaps) * math.exp(2.0 * lip_a * elapsed))


class _InvariantMonitor:
    """Accumulates InvariantRecords as Integrator.march reports samples."""

    def __init__(self, initial: DiscreteState, params: ModelParams) -> None:
        self.initial = initial
        self.params = params
        self.log = InvariantLog()
        self.initial_gaps = np.sqrt(_squared_gaps(initial.positions)) if initial.count > 1 else np.empty(0)

    def record(self, state: DiscreteState) -> None:
        elapsed = state.time - self.initial.time
        mass_dev = abs(state.mean_mass() - 1.0)

        m0 = self.initial.masses
        env_ratio = self._envelope_ratio(state.masses, m0, self.params.weight_rate * elapsed)
        env_ratio_unscaled = self._envelope_ratio(state.masses, m0, self.params.weight_rate_unscaled * elapsed)

        max_pos_ratio = float(np.max(np.linalg.norm(state.positions, axis=-1))) / self.params.opinion_bound
        sep_ratio = _separation_ratio(self.initial.positions, state.positions, elapsed, self.params.lip_a)

        ordered = True
        if state.dim == 1 and state.count > 1:
            initial_order = np.argsort(self.initial.positions[:, 0], kind="stable")
            ordered = bool(np.all(np.diff(state.positions[initial_order, 0]) > 0))

        if self.initial_gaps.size:
            gaps = np.sqrt(_squared_gaps(state.positions))
            stretch = np.maximum(gaps / self.initial_gaps, self.initial_gaps / gaps)
            self.log.empirical_separation_constant = max(self.log.empirical_separation_constant, float(np.max(stretch)))

        self.log.records.append(
            InvariantRecord(
                t=float(state.time),
                mass_dev=float(mass_dev),
                min_env_ratio=env_ratio,
                min_env_ratio_unscaled=env_ratio_unscaled,
                max_pos_ratio=max_pos_ratio,
                sep_ratio=sep_ratio,
                ordered=ordered,
            )
        )

    @staticmethod
    def _envelope_ratio(masses: FloatArray, initial_masses: FloatArray, exponent: float) -> float:
        lower = initial_masses * math.exp(-exponent)
        upper = initial_masses * math.exp(exponent)
        return float(min(np.min(masses / lower), np.min(upper / masses)))
