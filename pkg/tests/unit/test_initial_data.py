"""
Unit tests for the initial data families.

This module is licensed under the MIT License.
"""

import math

import numpy as np
import pytest

from pairwise_graphlimit.errors import ContractError, PreconditionError
from pairwise_graphlimit.initial_data import InitialData


class TestOpinionFamilies:
    """Test cases for the opinion families."""

    def test_identity(self):
        """Test x0(s) = s."""
        s = np.array([[0.1, 0.2], [0.7, 0.9]])
        np.testing.assert_array_equal(InitialData.identity(2)(s), s)

    def test_arctan(self):
        """Test the ramp onto [-1, 1]."""
        x0 = InitialData.arctan(4.0)
        np.testing.assert_allclose(x0(np.array([[0.0], [0.5], [1.0]]))[:, 0], [-1.0, 0.0, 1.0], atol=1e-15)
        values = x0(np.linspace(0.0, 1.0, 50)[:, None])[:, 0]
        assert np.all(np.diff(values) > 0)

    def test_arctan_needs_positive_steepness(self):
        """Test the steepness contract."""
        with pytest.raises(ContractError):
            InitialData.arctan(0.0)

    def test_affine_default_matrix(self):
        """Test x0(s) = A s + ε g(s) with the default matrix in d = 2."""
        x0 = InitialData.affine(2, epsilon=0.1)
        s = np.array([[0.25, 0.0]])
        expected = np.array([[0.25 + 0.1 * 0.0, 0.0 + 0.1 / (2 * math.pi)]])
        np.testing.assert_allclose(x0(s), expected, atol=1e-15)

    def test_affine_identity_matrix_default_elsewhere(self):
        """Test that the matrix defaults to the identity outside d = 2."""
        np.testing.assert_array_equal(InitialData.affine_matrix(3, None), np.eye(3))

    def test_affine_matrix_size(self):
        """Test the entry count contract."""
        with pytest.raises(ContractError, match="entries"):
            InitialData.affine_matrix(2, [1.0, 0.0, 0.0])

    def test_perturbation_is_one_lipschitz(self, rng):
        """Test that each component of g is 1-Lipschitz."""
        g = InitialData.perturbation(2)
        s, t = rng.uniform(size=(500, 2)), rng.uniform(size=(500, 2))
        lhs = np.abs(g(s) - g(t))
        assert np.all(lhs <= np.linalg.norm(s - t, axis=-1)[:, None] + 1e-15)

    def test_cells(self):
        """Test the step function in the labelling order."""
        x0 = InitialData.cells([-1.0, 1.0], 1, components=1)
        np.testing.assert_array_equal(x0(np.array([[0.2], [0.8]]))[:, 0], [-1.0, 1.0])
        m0 = InitialData.cells([0.5, 1.5, 1.0, 1.0], 2)
        np.testing.assert_array_equal(m0(np.array([[0.9, 0.1], [0.1, 0.9]])), [1.5, 1.0])

    def test_cells_bad_count(self):
        """Test that the values must fill a cube of cells."""
        with pytest.raises(PreconditionError):
            InitialData.cells([1.0, 1.0, 1.0], 2)
        with pytest.raises(ContractError, match="components"):
            InitialData.cells([1.0, 1.0, 1.0], 2, components=2)

    @pytest.mark.parametrize("family,dim,params", [
        ("identity", 1, {}),
        ("arctan", 1, {"steepness": 2.0}),
        ("affine", 2, {"matrix": None, "epsilon": 0.05}),
        ("cells", 1, {"values": [0.0, 1.0]}),
    ])
    def test_opinions_by_name(self, family, dim, params):
        """Test dispatch by family name."""
        x0 = InitialData.opinions(family, dim, **params)
        assert x0(np.full((3, dim), 0.3)).shape == (3, dim)

    def test_unknown_or_misplaced_family(self):
        """Test that unknown families and arctan in d > 1 are refused."""
        with pytest.raises(ContractError, match="unknown"):
            InitialData.opinions("spiral", 1)
        with pytest.raises(ContractError, match="one-dimensional"):
            InitialData.opinions("arctan", 2)
        with pytest.raises(ContractError, match="unknown"):
            InitialData.masses("gaussian", 1)


class TestMassFamilies:
    """Test cases for the mass families."""

    def test_uniform(self):
        """Test m0 = 1."""
        np.testing.assert_array_equal(InitialData.uniform_mass()(np.zeros((4, 2))), np.ones(4))

    def test_sine(self):
        """Test m0(s) = 1 + a·prod sin(2π s_k)."""
        m0 = InitialData.sine_mass(2, 0.5)
        np.testing.assert_allclose(m0(np.array([[0.25, 0.25], [0.25, 0.75], [0.0, 0.3]])), [1.5, 0.5, 1.0], atol=1e-15)

    def test_sine_amplitude(self):
        """Test that |a| < 1 keeps masses positive."""
        with pytest.raises(ContractError):
            InitialData.sine_mass(1, 1.0)

    def test_masses_by_name(self):
        """Test dispatch by family name."""
        assert InitialData.masses("sine", 1, amplitude=0.25)(np.array([[0.25]]))[0] == pytest.approx(1.25)
        assert InitialData.masses("cells", 1, values=[2.0])(np.array([[0.5]]))[0] == 2.0


class TestCertificates:
    """Test cases for the bi-Lipschitz certificates."""

    def test_affine_certificate(self):
        """Test (1/||A^-1|| - ε, ||A|| + ε) for a diagonal matrix."""
        lower, upper = InitialData.affine_certificate(np.diag([2.0, 1.0]), 0.1)
        assert lower == pytest.approx(0.9)
        assert upper == pytest.approx(2.1)

    def test_affine_certificate_rejects(self):
        """Test singular matrices and too large perturbations."""
        with pytest.raises(PreconditionError, match="singular"):
            InitialData.affine_certificate(np.zeros((2, 2)), 0.1)
        with pytest.raises(PreconditionError, match="epsilon"):
            InitialData.affine_certificate(np.eye(2), 0.5)
        with pytest.raises(PreconditionError):
            InitialData.affine(2, [1.0, 0.0, 0.0, 1.0], epsilon=0.6)

    def test_sampled_constants_within_certificate(self, rng):
        """Test that sampled distortion ratios fall inside the certified interval."""
        matrix = InitialData.affine_matrix(2, None)
        lower, upper = InitialData.affine_certificate(matrix, 0.1)
        sampled_lower, sampled_upper = InitialData.bilipschitz_constants(InitialData.affine(2, None, 0.1), 2, rng)
        assert lower - 1e-12 <= sampled_lower <= sampled_upper <= upper + 1e-12

    def test_identity_constants(self, rng):
        """Test that the identity has both constants equal to 1."""
        lower, upper = InitialData.bilipschitz_constants(InitialData.identity(3), 3, rng, samples=200)
        assert lower == pytest.approx(1.0)
        assert upper == pytest.approx(1.0)
