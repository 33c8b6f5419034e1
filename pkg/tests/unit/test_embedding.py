"""
Unit tests for projections, embeddings and the convergence functionals.

This module is licensed under the MIT License.
"""

import math

import numpy as np
import pytest

from pairwise_graphlimit.dynamics import DiscreteState
from pairwise_graphlimit.embedding import ConvergenceReport, ConvergenceRow, Embedding, NormKind
from pairwise_graphlimit.errors import ContractError, QuadratureError
from pairwise_graphlimit.grid import ContinuumTrajectory, GridFunction
from pairwise_graphlimit.initial_data import InitialData
from pairwise_graphlimit.labeling import CubeLabeling


def identity(s):
    return s


def unit(s):
    return np.ones(s.shape[0])


class TestNormKind:
    """Test cases for NormKind."""

    def test_default_for(self):
        """Test squared L2 in d = 1 and L1 otherwise."""
        assert NormKind.default_for(1) is NormKind.L2_SQUARED
        assert NormKind.default_for(2) is NormKind.L1
        assert NormKind.default_for(3) is NormKind.L1

    def test_l2_in_two_dimensions_refused(self):
        """Test that squared L2 is unavailable in d = 2."""
        with pytest.raises(ContractError, match="d = 2"):
            NormKind.L2_SQUARED.check(2)
        NormKind.L2_SQUARED.check(3)
        NormKind.L1.check(2)

    def test_measure(self):
        """Test cell-weighted norms of scalar and vector differences."""
        assert NormKind.L2_SQUARED.measure(np.array([1.0, -3.0])) == pytest.approx(5.0)
        assert NormKind.L1.measure(np.array([1.0, -3.0])) == pytest.approx(2.0)
        assert NormKind.L1.measure(np.array([[3.0, 4.0], [0.0, 0.0]])) == pytest.approx(2.5)


class TestProjection:
    """Test cases for cell averages of initial data."""

    def test_identity_midpoints(self):
        """Test that x0(s) = s projects to the cell midpoints."""
        state = Embedding.project_initial(identity, unit, 1, 4)
        np.testing.assert_allclose(state.positions[:, 0], [0.125, 0.375, 0.625, 0.875], atol=1e-14)
        np.testing.assert_allclose(state.masses, 1.0, atol=1e-14)

    def test_sine_mass(self):
        """Test the cell averages 1 ± 1/π of 1 + 0.5 sin(2πs) at N = 2."""
        state = Embedding.project_initial(identity, InitialData.sine_mass(1), 1, 2)
        np.testing.assert_allclose(state.masses, [1.0 + 1.0 / math.pi, 1.0 - 1.0 / math.pi], atol=1e-10)

    def test_two_dimensional_order(self):
        """Test that cell averages follow the flat labelling order."""
        xgrid, _ = Embedding.project_grids(identity, unit, 2, 2)
        np.testing.assert_allclose(xgrid.values, [[0.25, 0.25], [0.75, 0.25], [0.25, 0.75], [0.75, 0.75]], atol=1e-14)

    def test_quadrature_check(self):
        """Test that a jump inside a cell fails the refinement check."""

        def jump(s):
            return s + (s > 0.37)

        with pytest.raises(QuadratureError, match="N=2"):
            Embedding.project_initial(jump, unit, 1, 2)

    def test_invalid_masses(self):
        """Test that projected masses must form a density."""
        with pytest.raises(ContractError):
            Embedding.project_grids(identity, lambda s: 2.0 * unit(s), 1, 4)

    def test_component_mismatch(self):
        """Test that x0 must return d components."""
        with pytest.raises(ContractError, match="components"):
            Embedding.project_grids(lambda s: s[:, :1], unit, 2, 2)


class TestRiemannEmbed:
    """Test cases for riemann_embed."""

    def test_embed(self, asymmetric_pair):
        """Test that the step functions carry the particle values."""
        xgrid, mgrid = Embedding.riemann_embed(asymmetric_pair, CubeLabeling(1, 2))
        np.testing.assert_array_equal(xgrid.evaluate([0.1, 0.9])[:, 0], [-1.0, 1.0])
        np.testing.assert_array_equal(mgrid.evaluate([0.1, 0.9]), [1.5, 0.5])

    def test_size_mismatch(self, asymmetric_pair):
        """Test that P must equal N^d."""
        with pytest.raises(ContractError):
            Embedding.riemann_embed(asymmetric_pair, CubeLabeling(1, 4))
        with pytest.raises(ContractError):
            Embedding.riemann_embed(DiscreteState.create(np.zeros((4, 1)) + np.arange(4)[:, None], np.ones(4)), CubeLabeling(2, 2))


class TestXiZeta:
    """Test cases for xi_zeta."""

    def test_projection_error_of_identity(self):
        """Test xi = 1/48 - 1/(12K^2) for the N = 2 projection of x0(s) = s."""
        resolution = 512
        embedded = Embedding.project_grids(identity, unit, 1, 2)
        reference = Embedding.project_grids(identity, unit, 1, resolution)
        xi, zeta = Embedding.xi_zeta(embedded, reference)
        assert xi == pytest.approx(1.0 / 48.0 - 1.0 / (12.0 * resolution**2), rel=1e-10)
        assert xi == pytest.approx(1.0 / 48.0, abs=1e-6)
        assert zeta == 0.0

    def test_identity_sweep_decreases(self):
        """Test that xi over N = 2..32 follows 1/(12N^2) - 1/(12K^2) and strictly decreases."""
        resolution = 512
        reference = Embedding.project_grids(identity, unit, 1, resolution)
        errors = []
        for side in (2, 4, 8, 16, 32):
            state = Embedding.project_initial(identity, unit, 1, side)
            xi, _ = Embedding.xi_zeta(Embedding.riemann_embed(state, CubeLabeling(1, side)), reference)
            assert xi == pytest.approx(1.0 / (12.0 * side**2) - 1.0 / (12.0 * resolution**2), rel=1e-9)
            errors.append(xi)
        assert ConvergenceReport.strictly_decreasing(errors)
        rates = [math.log2(earlier / later) for earlier, later in zip(errors, errors[1:])]
        assert all(rate == pytest.approx(2.0, abs=0.01) for rate in rates)

    def test_constant_offset(self):
        """Test xi = delta^2 for an offset opinion grid."""
        reference = Embedding.project_grids(identity, unit, 1, 8)
        shifted = (GridFunction(1, 8, reference[0].values + 0.1), reference[1])
        xi, zeta = Embedding.xi_zeta(shifted, reference)
        assert xi == pytest.approx(0.01, rel=1e-12)
        assert zeta == 0.0

    def test_l1_in_two_dimensions(self):
        """Test the L1 functional for a vector offset in d = 2."""
        reference = Embedding.project_grids(identity, unit, 2, 4)
        offset = reference[0].values + np.array([0.3, 0.4])
        masses = GridFunction(2, 4, reference[1].values * 1.0)
        xi, zeta = Embedding.xi_zeta((GridFunction(2, 4, offset), masses), reference)
        assert xi == pytest.approx(0.5, rel=1e-12)
        assert zeta == 0.0

    def test_l2_refused_in_two_dimensions(self):
        """Test that the squared L2 functional is refused in d = 2."""
        reference = Embedding.project_grids(identity, unit, 2, 2)
        with pytest.raises(ContractError):
            Embedding.xi_zeta(reference, reference, NormKind.L2_SQUARED)

    def test_resolution_must_divide(self):
        """Test that the reference resolution must be a multiple of N."""
        with pytest.raises(ContractError):
            Embedding.xi_zeta(Embedding.project_grids(identity, unit, 1, 3), Embedding.project_grids(identity, unit, 1, 8))


class TestGnDiagnostic:
    """Test cases for gn_diagnostic."""

    def _reference(self, resolution, masses=None):
        xgrid, mgrid = Embedding.project_grids(identity, masses or InitialData.sine_mass(1), 1, resolution)
        return ContinuumTrajectory.constant(xgrid, mgrid, [0.0])

    def test_vanishes_at_full_resolution(self, linear, sign1):
        """Test g_K = 0."""
        assert Embedding.gn_diagnostic(self._reference(16), 16, 0.0, linear, sign1) == 0.0

    def test_vanishes_for_step_data(self, linear, sign1):
        """Test g_N = 0 when the reference data are constant on the N-cells."""
        coarse_x = GridFunction(1, 4, [[0.1], [0.3], [0.6], [0.9]])
        coarse_m = GridFunction(1, 4, [0.5, 1.5, 1.25, 0.75])
        reference = ContinuumTrajectory.constant(coarse_x.refine(32), coarse_m.refine(32), [0.0])
        assert Embedding.gn_diagnostic(reference, 4, 0.0, linear, sign1) <= 1e-28

    def test_decreases_with_refinement(self, linear, sign1):
        """Test that ||g_N|| decreases as N doubles for smooth data."""
        reference = self._reference(64)
        values = [Embedding.gn_diagnostic(reference, side, 0.0, linear, sign1) for side in (4, 8, 16, 32)]
        assert ConvergenceReport.strictly_decreasing(values)
        assert values[-1] > 0

    def test_side_must_divide(self, linear, sign1):
        """Test that N must divide K."""
        with pytest.raises(ContractError):
            Embedding.gn_diagnostic(self._reference(16), 3, 0.0, linear, sign1)


class TestConvergenceReport:
    """Test cases for ConvergenceReport."""

    def _report(self):
        report = ConvergenceReport(1, NormKind.L2_SQUARED)
        for side, scale in ((8, 4.0), (16, 1.0)):
            for t in (1.0, 0.5):
                report.add(ConvergenceRow(side, t, xi=scale * t, zeta=0.0, gn=scale / 2, w1=scale / 4))
        return report

    def test_levels_and_series(self):
        """Test per-level grouping sorted by time."""
        report = self._report()
        assert report.levels == [8, 16]
        assert [row.t for row in report.series(8)] == [0.5, 1.0]

    def test_summary(self):
        """Test suprema, decay ratios and empirical rates."""
        summary = self._report().summary()
        assert summary["sup_xi_plus_zeta"] == [4.0, 1.0]
        assert summary["sup_gn"] == [2.0, 0.5]
        assert summary["sup_w1"] == [1.0, 0.25]
        assert summary["decay_ratios"] == [0.25]
        assert summary["empirical_rates"] == pytest.approx([2.0])
        assert summary["strictly_decreasing"]
        assert summary["gn_strictly_decreasing"]
        assert summary["norm"] == "l2-squared"

    def test_strictly_decreasing(self):
        """Test the strict decrease predicate."""
        assert ConvergenceReport.strictly_decreasing([3.0, 2.0, 1.0])
        assert not ConvergenceReport.strictly_decreasing([3.0, 3.0])
        assert ConvergenceReport.strictly_decreasing([5.0])

    def test_negative_entry_rejected(self):
        """Test that functionals must be non-negative."""
        report = ConvergenceReport(1, NormKind.L2_SQUARED)
        with pytest.raises(ContractError):
            report.add(ConvergenceRow(8, 0.5, xi=-1.0, zeta=0.0, gn=0.0, w1=0.0))
        with pytest.raises(ContractError):
            report.add(ConvergenceRow(8, 0.5, xi=0.0, zeta=0.0, gn=math.nan, w1=0.0))

    def test_write_csv(self, tmp_path):
        """Test the 'N, t, xi, zeta, gn, w1' layout sorted by level and time."""
        path = tmp_path / "convergence.csv"
        self._report().write_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "N,t,xi,zeta,gn,w1"
        assert lines[1] == "8,0.5,2.0,0.0,2.0,1.0"
        assert len(lines) == 5
