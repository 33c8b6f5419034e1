"""
picard module - Fixed-point solvers for the graph-limit equation

The coupled equation is solved the way its well-posedness is proved: freeze the
masses and solve the opinion equation by Picard iteration of

    x(t) = x(t_a) + int_{t_a}^t int m(tau, s*) a(x(tau, s*) - x(tau, s)) ds* dtau

on successive windows [t_a, t_a + T_w]; freeze the opinions and solve

    m(t) = m(t_a) + int_{t_a}^t Psi(s, x(tau), m(tau)) dtau

the same way; then alternate the two until the pair stops changing. Time
integrals use composite trapezoid (or left rectangle) sums on the time grid,
and each sweep evaluates the right-hand side at all nodes of the window in
batched calls.

This module is licensed under the MIT License.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from pairwise_graphlimit.dynamics import Dynamics
from pairwise_graphlimit.errors import ContractError, SolverError, WindowTooLongError
from pairwise_graphlimit.grid import ContinuumTrajectory, GridFunction, as_positions
from pairwise_graphlimit.kernels import FloatArray, InfluenceKernel, SignMap

logger = logging.getLogger(__name__)


class TimeQuadrature(Enum):
    """Rules for the time integrals inside the Picard maps."""

    TRAPEZOID = "trapezoid"
    RECTANGLE = "rectangle"


@dataclass(frozen=True)
class PicardConfig:
    """
    Picard solver settings.

    Attributes:
        window: Window length; None selects it from the contraction bounds
        tolerance: Inner stopping threshold on successive sup-differences
        max_iterations: Inner sweeps per window
        quadrature: Time quadrature rule
        outer_tolerance: Stopping threshold of the coupled alternation
        max_outer_iterations: Alternations before giving up
        max_halvings: Window halvings allowed when the window is automatic
        safety: Fraction of the contraction bound used by automatic windows
    """

    window: float | None = None
    tolerance: float = 1e-12
    max_iterations: int = 200
    quadrature: TimeQuadrature = TimeQuadrature.TRAPEZOID
    outer_tolerance: float = 1e-10
    max_outer_iterations: int = 60
    max_halvings: int = 10
    safety: float = 0.5

    def __post_init__(self) -> None:
        object.__setattr__(self, "quadrature", TimeQuadrature(self.quadrature))
        if self.window is not None and not self.window > 0:
            msg = f"window must be positive, got {self.window}"
            raise ContractError(msg)
        if not (self.tolerance > 0 and self.outer_tolerance > 0):
            msg = "tolerances must be positive"
            raise ContractError(msg)
        if self.max_iterations < 1 or self.max_outer_iterations < 1:
            msg = "iteration limits must be >= 1"
            raise ContractError(msg)
        if not 0 < self.safety < 1:
            msg = f"safety must lie in (0, 1), got {self.safety}"
            raise ContractError(msg)


@dataclass(frozen=True)
class WindowReport:
    """Iteration history of one window."""

    start: float
    length: float
    iterations: int
    differences: tuple[float, ...]

    @property
    def contraction_factors(self) -> tuple[float, ...]:
        """Ratios of successive sup-differences (skipping exact zeros)."""
        pairs = zip(self.differences[:-1], self.differences[1:], strict=False)
        return tuple(later / earlier for earlier, later in pairs if earlier > 0)


@dataclass(frozen=True)
class PicardSolution:
    """A Picard solve: the trajectory and its convergence history."""

    trajectory: ContinuumTrajectory
    windows: tuple[WindowReport, ...] = ()
    outer_differences: tuple[float, ...] = field(default=())


def _uniform_step(times: FloatArray) -> float:
    if times.shape[0] < 2:
        msg = "a Picard solve needs at least two time nodes"
        raise ContractError(msg)
    steps = np.diff(times)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        msg = "Picard solvers need a uniform time grid"
        raise ContractError(msg)
    return float(steps[0])


def _cumulative(values: FloatArray, step: float, rule: TimeQuadrature) -> FloatArray:
    """Running integral from the first node, same shape as values."""
    out = np.zeros_like(values)
    if rule == TimeQuadrature.TRAPEZOID:
        out[1:] = np.cumsum(0.5 * step * (values[:-1] + values[1:]), axis=0)
    else:
        out[1:] = np.cumsum(step * values[:-1], axis=0)
    return out


CHUNK_ELEMENTS = 1 << 22


def _by_chunks(
    evaluate: Callable[[FloatArray, FloatArray], FloatArray],
    positions: FloatArray,
    masses: FloatArray,
) -> FloatArray:
    """Apply a batched right-hand side node by node-block so pair arrays stay below CHUNK_ELEMENTS."""
    nodes, count, dim = positions.shape
    block = max(1, CHUNK_ELEMENTS // (count * count * dim))
    if block >= nodes:
        return evaluate(positions, masses)
    return np.concatenate([evaluate(positions[k : k + block], masses[k : k + block]) for k in range(0, nodes, block)])


def _window_steps(window: float, step: float, total: int) -> int:
    if not math.isfinite(window):
        return total
    return max(1, min(total, int(math.floor(window / step + 1e-9))))


class PicardSolver:
    """Decoupled and coupled Picard solvers on a fixed time grid."""

    @staticmethod
    def auto_window_x(lip_a: float, mass_sup: float, safety: float) -> float:
        """safety / (2·L·sup m), the contraction bound of the opinion map."""
        rate = 2.0 * lip_a * mass_sup
        return safety / rate if rate > 0 else math.inf

    @staticmethod
    def auto_window_m(lip_a: float, sign_bound: float, position_sup: float, mass_bound: float, safety: float) -> float:
        """
        Window for the mass map from the sup-bounds of the window.

        Psi is cubic in m with |a(x_k - x_i)| <= 2·L·X and |s| <= S_inf; on the envelope
        m <= 2M its Lipschitz constant in m is at most 3·2·L·X·S_inf·(2M)^2.
        """
        rate = 6.0 * lip_a * position_sup * sign_bound * (2.0 * mass_bound) ** 2
        return safety / rate if rate > 0 else math.inf

    @staticmethod
    def _solve_x_windows(
        x_start: FloatArray,
        masses: FloatArray,
        times: FloatArray,
        window: float,
        cfg: PicardConfig,
        kernel: InfluenceKernel,
    ) -> tuple[FloatArray, list[WindowReport]]:
        step = _uniform_step(times)
        total = times.shape[0] - 1
        width = _window_steps(window, step, total)
        solution = np.empty((times.shape[0], *x_start.shape))
        solution[0] = x_start
        reports = []

        a = 0
        while a < total:
            b = min(a + width, total)
            start = solution[a]
            window_masses = masses[a : b + 1]
            iterate = np.broadcast_to(start, (b - a + 1, *start.shape)).copy()
            differences = []
            for _ in range(cfg.max_iterations):
                rates = _by_chunks(lambda x, m: Dynamics.velocities(x, m, kernel), iterate, window_masses)
                updated = start + _cumulative(rates, step, cfg.quadrature)
                difference = float(np.max(np.linalg.norm(updated - iterate, axis=-1)))
                iterate = updated
                differences.append(difference)
                if not math.isfinite(difference):
                    break
                if difference < cfg.tolerance:
                    break
            else:
                raise SolverError(
                    f"opinion Picard iteration did not converge in {cfg.max_iterations} sweeps",
                    window_start=float(times[a]),
                    window=float(times[b] - times[a]),
                )
            if not math.isfinite(differences[-1]):
                raise SolverError("opinion Picard iteration diverged", window_start=float(times[a]), window=float(times[b] - times[a]))

            solution[a : b + 1] = iterate
            reports.append(WindowReport(float(times[a]), float(times[b] - times[a]), len(differences), tuple(differences)))
            a = b
        return solution, reports

    @staticmethod
    def _solve_m_windows(
        m_start: FloatArray,
        positions: FloatArray,
        times: FloatArray,
        window: float,
        cfg: PicardConfig,
        kernel: InfluenceKernel,
        sign: SignMap,
    ) -> tuple[FloatArray, list[WindowReport]]:
        step = _uniform_step(times)
        total = times.shape[0] - 1
        width = _window_steps(window, step, total)
        solution = np.empty((times.shape[0], *m_start.shape))
        solution[0] = m_start
        reports = []

        a = 0
        while a < total:
            b = min(a + width, total)
            start = solution[a]
            bound = max(float(np.max(start)), 1.0 / float(np.min(start)))
            window_positions = positions[a : b + 1]
            iterate = np.broadcast_to(start, (b - a + 1, *start.shape)).copy()
            differences = []
            for _ in range(cfg.max_iterations):
                rates = _by_chunks(lambda x, m: Dynamics.rates(x, m, kernel, sign)[1], window_positions, iterate)
                updated = start + _cumulative(rates, step, cfg.quadrature)
                if np.any(updated < 1.0 / (2.0 * bound)) or np.any(updated > 2.0 * bound):
                    raise WindowTooLongError(
                        f"mass iterate left the envelope [1/{2 * bound:.4g}, {2 * bound:.4g}]",
                        window_start=float(times[a]),
                        window=float(times[b] - times[a]),
                    )
                difference = float(np.max(np.abs(updated - iterate)))
                iterate = updated
                differences.append(difference)
                if difference < cfg.tolerance:
                    break
            else:
                raise SolverError(
                    f"mass Picard iteration did not converge in {cfg.max_iterations} sweeps",
                    window_start=float(times[a]),
                    window=float(times[b] - times[a]),
                )

            solution[a : b + 1] = iterate
            reports.append(WindowReport(float(times[a]), float(times[b] - times[a]), len(differences), tuple(differences)))
            a = b
        return solution, reports

    @staticmethod
    def decoupled_x(
        x0grid: GridFunction,
        frozen_m: ContinuumTrajectory,
        cfg: PicardConfig,
        kernel: InfluenceKernel,
    ) -> PicardSolution:
        """
        Solve the opinion equation with the masses frozen to frozen_m, on frozen_m's time grid.

        Raises:
            ContractError: If grids differ, or an explicit window breaks T_w < 1/(2·L·sup m)
            SolverError: If a window does not converge
        """
        if (x0grid.dim, x0grid.resolution) != (frozen_m.dim, frozen_m.resolution):
            msg = "initial opinions and frozen masses live on different grids"
            raise ContractError(msg)
        mass_sup = float(np.max(frozen_m.masses))
        bound = PicardSolver.auto_window_x(kernel.lipschitz, mass_sup, 1.0)
        if cfg.window is not None and cfg.window >= bound:
            msg = f"window {cfg.window} breaks the contraction condition T_w < {bound:.6g}"
            raise ContractError(msg)
        window = cfg.window if cfg.window is not None else PicardSolver.auto_window_x(kernel.lipschitz, mass_sup, cfg.safety)

        positions, reports = PicardSolver._with_halving(
            lambda w: PicardSolver._solve_x_windows(as_positions(x0grid), frozen_m.masses, frozen_m.times, w, cfg, kernel),
            window,
            float(frozen_m.times[-1] - frozen_m.times[0]),
            cfg,
            explicit=cfg.window is not None,
        )
        trajectory = ContinuumTrajectory(x0grid.dim, x0grid.resolution, frozen_m.times, positions, frozen_m.masses)
        return PicardSolution(trajectory, tuple(reports))

    @staticmethod
    def decoupled_m(
        m0grid: GridFunction,
        frozen_x: ContinuumTrajectory,
        cfg: PicardConfig,
        kernel: InfluenceKernel,
        sign: SignMap,
    ) -> PicardSolution:
        """
        Solve the mass equation with the opinions frozen to frozen_x, on frozen_x's time grid.

        Raises:
            ContractError: If grids differ or m0 is not a valid mass grid
            WindowTooLongError: If an explicit window lets an iterate leave [1/(2M), 2M]
            SolverError: If a window does not converge
        """
        if (m0grid.dim, m0grid.resolution) != (frozen_x.dim, frozen_x.resolution):
            msg = "initial masses and frozen opinions live on different grids"
            raise ContractError(msg)
        m0grid.check_mass()
        position_sup = float(np.max(np.linalg.norm(frozen_x.positions, axis=-1)))
        mass_bound = max(float(np.max(m0grid.values)), 1.0 / float(np.min(m0grid.values)))
        window = (
            cfg.window
            if cfg.window is not None
            else PicardSolver.auto_window_m(kernel.lipschitz, sign.bound, position_sup, mass_bound, cfg.safety)
        )

        masses, reports = PicardSolver._with_halving(
            lambda w: PicardSolver._solve_m_windows(m0grid.values, frozen_x.positions, frozen_x.times, w, cfg, kernel, sign),
            window,
            float(frozen_x.times[-1] - frozen_x.times[0]),
            cfg,
            explicit=cfg.window is not None,
        )
        trajectory = ContinuumTrajectory(m0grid.dim, m0grid.resolution, frozen_x.times, frozen_x.positions, masses)
        return PicardSolution(trajectory, tuple(reports))

    @staticmethod
    def _with_halving(
        solve: Callable[[float], tuple[FloatArray, list[WindowReport]]],
        window: float,
        horizon: float,
        cfg: PicardConfig,
        *,
        explicit: bool,
    ) -> tuple[FloatArray, list[WindowReport]]:
        """Run solve(window), halving an automatic window after failures."""
        window = min(window, horizon)
        attempt = 0
        while True:
            try:
                return solve(window)
            except SolverError as error:
                if explicit or attempt == cfg.max_halvings:
                    raise
                attempt += 1
                window /= 2.0
                logger.warning("%s; retrying with window %.4g", error, window)

    @staticmethod
    def solve_coupled(
        x0grid: GridFunction,
        m0grid: GridFunction,
        cfg: PicardConfig,
        kernel: InfluenceKernel,
        sign: SignMap,
        *,
        horizon: float,
        dt: float,
    ) -> PicardSolution:
        """
        Alternate decoupled_x and decoupled_m until sup|x_{n+1} - x_n| + sup_t ||m_{n+1} - m_n||_L1 < tolerance.

        Returns:
            The limit trajectory on the grid t_k = k·dt of [0, horizon], with the
            inner window reports of the last alternation and the outer differences u_n

        Raises:
            SolverError: If the alternation does not converge in cfg.max_outer_iterations
        """
        x0grid.require_compatible(m0grid)
        steps = round(horizon / dt)
        if steps < 1 or abs(steps * dt - horizon) > 1e-9 * max(1.0, horizon):
            msg = f"dt={dt} does not divide the horizon {horizon}"
            raise ContractError(msg)
        times = np.linspace(0.0, horizon, steps + 1)

        current = ContinuumTrajectory.constant(x0grid, m0grid, times)
        outer: list[float] = []
        reports: tuple[WindowReport, ...] = ()
        for n in range(1, cfg.max_outer_iterations + 1):
            x_solution = PicardSolver.decoupled_x(x0grid, current, cfg, kernel)
            m_solution = PicardSolver.decoupled_m(m0grid, x_solution.trajectory, cfg, kernel, sign)
            updated = m_solution.trajectory

            position_change = float(np.max(np.linalg.norm(updated.positions - current.positions, axis=-1)))
            mass_change = float(np.max(np.mean(np.abs(updated.masses - current.masses), axis=-1)))
            outer.append(position_change + mass_change)
            reports = x_solution.windows + m_solution.windows
            current = updated
            logger.debug("coupled Picard alternation %d: u_n = %.3e", n, outer[-1])
            if outer[-1] < cfg.outer_tolerance:
                logger.info("coupled Picard converged after %d alternations", n)
                return PicardSolution(current, reports, tuple(outer))

        raise SolverError(f"coupled Picard alternation did not converge in {cfg.max_outer_iterations} iterations")
