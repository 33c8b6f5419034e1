"""
Unit tests for the Picard solvers.

This module is licensed under the MIT License.
"""

import math

import numpy as np
import pytest

from pairwise_graphlimit.errors import ContractError, SolverError, WindowTooLongError
from pairwise_graphlimit.grid import ContinuumTrajectory, GridFunction
from pairwise_graphlimit.picard import (
    PicardConfig,
    PicardSolver,
    TimeQuadrature,
    WindowReport,
    _cumulative,
)


def _midpoints(resolution):
    return GridFunction(1, resolution, ((np.arange(resolution) + 0.5) / resolution)[:, None])


def _ones(resolution):
    return GridFunction(1, resolution, np.ones(resolution))


class TestPicardConfig:
    """Test cases for PicardConfig."""

    def test_defaults(self):
        """Test the default settings."""
        cfg = PicardConfig()
        assert cfg.window is None
        assert cfg.quadrature is TimeQuadrature.TRAPEZOID

    def test_quadrature_from_string(self):
        """Test naming the rule by value."""
        assert PicardConfig(quadrature="rectangle").quadrature is TimeQuadrature.RECTANGLE

    @pytest.mark.parametrize("overrides", [
        {"window": 0.0},
        {"tolerance": 0.0},
        {"outer_tolerance": -1.0},
        {"max_iterations": 0},
        {"safety": 1.0},
    ])
    def test_invalid(self, overrides):
        """Test the settings contracts."""
        with pytest.raises(ContractError):
            PicardConfig(**overrides)


class TestHelpers:
    """Test cases for the quadrature helpers and window bounds."""

    def test_cumulative_trapezoid_exact_for_linear(self):
        """Test that the trapezoid rule integrates t exactly."""
        times = np.linspace(0.0, 1.0, 11)
        np.testing.assert_allclose(_cumulative(times, 0.1, TimeQuadrature.TRAPEZOID), times**2 / 2, atol=1e-15)

    def test_cumulative_rectangle(self):
        """Test the left rectangle rule."""
        values = np.array([1.0, 2.0, 3.0])
        np.testing.assert_allclose(_cumulative(values, 0.5, TimeQuadrature.RECTANGLE), [0.0, 0.5, 1.5])

    def test_auto_windows(self):
        """Test the contraction bounds behind automatic windows."""
        assert PicardSolver.auto_window_x(1.0, 2.0, 0.5) == pytest.approx(0.125)
        assert PicardSolver.auto_window_m(1.0, 1.0, 1.0, 2.0, 0.5) == pytest.approx(0.5 / 96.0)
        assert PicardSolver.auto_window_x(0.0, 2.0, 0.5) == math.inf

    def test_contraction_factors(self):
        """Test ratios of successive differences."""
        report = WindowReport(0.0, 0.1, 3, (0.1, 0.01, 0.0))
        assert report.contraction_factors == pytest.approx((0.1, 0.0))


class TestDecoupledX:
    """Test cases for the opinion solver with frozen masses."""

    def test_closed_form(self, linear):
        """Test x(t, s) = 1/2 + (s - 1/2)e^{-t} against the frozen unit density."""
        resolution = 16
        times = np.linspace(0.0, 1.0, 1001)
        frozen = ContinuumTrajectory.constant(_midpoints(resolution), _ones(resolution), times)
        solution = PicardSolver.decoupled_x(_midpoints(resolution), frozen, PicardConfig(), linear)
        midpoints = (np.arange(resolution) + 0.5) / resolution
        for t in (0.25, 1.0):
            xgrid, _ = solution.trajectory.grids_at(t)
            np.testing.assert_allclose(xgrid.values[:, 0], 0.5 + (midpoints - 0.5) * math.exp(-t), atol=1e-6)

    def test_contraction_factors_bounded(self, linear):
        """Test that observed contraction stays below 2·L·sup m·T_w."""
        cfg = PicardConfig()
        times = np.linspace(0.0, 1.0, 1001)
        frozen = ContinuumTrajectory.constant(_midpoints(8), _ones(8), times)
        solution = PicardSolver.decoupled_x(_midpoints(8), frozen, cfg, linear)
        assert len(solution.windows) == 4
        for window in solution.windows:
            bound = 2.0 * 1.0 * 1.0 * window.length
            assert all(factor <= bound + 1e-12 for factor in window.contraction_factors)
            assert window.differences[-1] < cfg.tolerance

    def test_zero_kernel_single_sweep(self, zero_kernel):
        """Test that with a = 0 the first iterate is the fixed point."""
        frozen = ContinuumTrajectory.constant(_midpoints(4), _ones(4), np.linspace(0.0, 1.0, 11))
        solution = PicardSolver.decoupled_x(_midpoints(4), frozen, PicardConfig(), zero_kernel)
        assert [window.iterations for window in solution.windows] == [1]
        assert np.all(solution.trajectory.positions == solution.trajectory.positions[0])

    def test_explicit_window_too_long(self, linear):
        """Test the contraction condition on an explicit window."""
        frozen = ContinuumTrajectory.constant(_midpoints(4), _ones(4), np.linspace(0.0, 1.0, 11))
        with pytest.raises(ContractError, match="contraction"):
            PicardSolver.decoupled_x(_midpoints(4), frozen, PicardConfig(window=0.5), linear)

    def test_grid_mismatch(self, linear):
        """Test that the frozen masses must live on the same grid."""
        frozen = ContinuumTrajectory.constant(_midpoints(4), _ones(4), np.linspace(0.0, 1.0, 11))
        with pytest.raises(ContractError):
            PicardSolver.decoupled_x(_midpoints(2), frozen, PicardConfig(), linear)

    def test_iteration_budget(self, linear):
        """Test SolverError when an explicit window runs out of sweeps."""
        frozen = ContinuumTrajectory.constant(_midpoints(4), _ones(4), np.linspace(0.0, 0.4, 41))
        with pytest.raises(SolverError, match="did not converge") as info:
            PicardSolver.decoupled_x(_midpoints(4), frozen, PicardConfig(window=0.4, max_iterations=2), linear)
        assert info.value.window_start == 0.0


class TestDecoupledM:
    """Test cases for the mass solver with frozen opinions."""

    def test_constant_opinions_keep_masses(self, linear, sign1):
        """Test that identical opinions exchange no weight."""
        masses = GridFunction(1, 4, [0.5, 1.5, 1.25, 0.75])
        frozen = ContinuumTrajectory.constant(GridFunction(1, 4, np.full((4, 1), 0.3)), masses, np.linspace(0.0, 1.0, 101))
        solution = PicardSolver.decoupled_m(masses, frozen, PicardConfig(), linear, sign1)
        np.testing.assert_allclose(solution.trajectory.masses, np.broadcast_to(masses.values, (101, 4)), atol=1e-15)

    def test_two_cells_keep_unit_mean(self, linear, sign1):
        """Test that the mean mass stays 1 on the asymmetric two-cell grid."""
        masses = GridFunction(1, 2, [1.5, 0.5])
        frozen = ContinuumTrajectory.constant(GridFunction(1, 2, [[-1.0], [1.0]]), masses, np.linspace(0.0, 0.1, 101))
        solution = PicardSolver.decoupled_m(masses, frozen, PicardConfig(), linear, sign1)
        np.testing.assert_allclose(solution.trajectory.masses.mean(axis=1), 1.0, atol=1e-12)
        assert solution.trajectory.masses[-1, 0] > 1.5

    def test_masses_stay_in_growth_envelope(self, linear, sign1):
        """Test m0·exp(-4LXS·t) <= m(t) <= m0·exp(4LXS·t) over several automatic windows."""
        resolution = 8
        masses = GridFunction(1, resolution, 1.0 + 0.5 * np.sin(2.0 * np.pi * (np.arange(resolution) + 0.5) / resolution))
        frozen = ContinuumTrajectory.constant(_midpoints(resolution), masses, np.linspace(0.0, 0.5, 51))
        solution = PicardSolver.decoupled_m(masses, frozen, PicardConfig(), linear, sign1)
        assert len(solution.windows) > 1
        position_sup = float(np.max(np.abs(frozen.positions)))
        rate = 4.0 * linear.lipschitz * position_sup * sign1.bound
        growth = np.exp(rate * solution.trajectory.times)[:, None]
        computed = solution.trajectory.masses
        assert np.all(computed <= masses.values * growth + 1e-12)
        assert np.all(computed >= masses.values / growth - 1e-12)
        np.testing.assert_allclose(computed.mean(axis=1), 1.0, atol=1e-12)

    def test_window_too_long(self, linear, sign1):
        """Test that an explicit window letting masses leave [1/(2M), 2M] is refused."""
        masses = GridFunction(1, 2, [1.5, 0.5])
        frozen = ContinuumTrajectory.constant(GridFunction(1, 2, [[-1.0], [1.0]]), masses, np.linspace(0.0, 20.0, 201))
        with pytest.raises(WindowTooLongError, match="envelope"):
            PicardSolver.decoupled_m(masses, frozen, PicardConfig(window=20.0), linear, sign1)

    def test_invalid_masses(self, linear, sign1):
        """Test that the initial masses must be a density."""
        masses = GridFunction(1, 2, [1.0, 2.0])
        frozen = ContinuumTrajectory.constant(_midpoints(2), masses, np.linspace(0.0, 1.0, 11))
        with pytest.raises(ContractError):
            PicardSolver.decoupled_m(masses, frozen, PicardConfig(), linear, sign1)


class TestSolveCoupled:
    """Test cases for the coupled alternation."""

    def test_zero_kernel(self, zero_kernel, sign1):
        """Test that with a = 0 the initial data are the solution after one alternation."""
        masses = GridFunction(1, 4, [0.5, 1.5, 1.25, 0.75])
        solution = PicardSolver.solve_coupled(_midpoints(4), masses, PicardConfig(), zero_kernel, sign1, horizon=0.5, dt=0.05)
        assert solution.outer_differences == (0.0,)
        assert np.all(solution.trajectory.masses == masses.values)
        assert solution.trajectory.times.size == 11

    def test_outer_differences_decay(self, linear, sign1):
        """Test convergence of the alternation on a small smooth problem."""
        resolution = 8
        masses = 1.0 + 0.5 * np.sin(2.0 * np.pi * (np.arange(resolution) + 0.5) / resolution)
        solution = PicardSolver.solve_coupled(
            _midpoints(resolution), GridFunction(1, resolution, masses), PicardConfig(), linear, sign1, horizon=0.1, dt=1e-3
        )
        outer = solution.outer_differences
        assert outer[-1] < PicardConfig().outer_tolerance
        assert outer[-1] < outer[0]
        np.testing.assert_allclose(solution.trajectory.masses.mean(axis=1), 1.0, atol=1e-12)

    def test_outer_budget(self, linear, sign1):
        """Test SolverError when the alternation runs out of iterations."""
        resolution = 8
        masses = 1.0 + 0.5 * np.sin(2.0 * np.pi * (np.arange(resolution) + 0.5) / resolution)
        with pytest.raises(SolverError, match="alternation"):
            PicardSolver.solve_coupled(
                _midpoints(resolution),
                GridFunction(1, resolution, masses),
                PicardConfig(max_outer_iterations=1),
                linear,
                sign1,
                horizon=0.1,
                dt=1e-3,
            )

    def test_dt_must_divide_horizon(self, linear, sign1):
        """Test the time grid contract."""
        with pytest.raises(ContractError, match="divide"):
            PicardSolver.solve_coupled(_midpoints(2), _ones(2), PicardConfig(), linear, sign1, horizon=1.0, dt=0.3)
