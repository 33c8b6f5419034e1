"""
initial_data module - Families of initial opinions x0 and masses m0 on I^d

All functions take labels s of shape (n, d). Opinion maps return (n, d), mass
densities (n,). Opinion families are injective by construction: increasing in
d = 1, bi-Lipschitz in d > 1.

This module is licensed under the MIT License.
"""

import math
from collections.abc import Sequence
from typing import Any

import numpy as np

from pairwise_graphlimit.dynamics import perfect_root
from pairwise_graphlimit.embedding import InitialFunction
from pairwise_graphlimit.errors import ContractError, PreconditionError
from pairwise_graphlimit.kernels import FloatArray
from pairwise_graphlimit.labeling import CubeLabeling

DEFAULT_MATRIX = (1.0, 0.3, 0.0, 0.8)


class InitialData:
    """Opinion and mass families and their certificates."""

    OPINION_FAMILIES = ("identity", "arctan", "affine", "cells")
    MASS_FAMILIES = ("uniform", "sine", "cells")

    @staticmethod
    def identity(dim: int) -> InitialFunction:
        """x0(s) = s."""

        def x0(s: FloatArray) -> FloatArray:
            return np.array(s, dtype=np.float64).reshape(-1, dim)

        return x0

    @staticmethod
    def arctan(steepness: float = 4.0) -> InitialFunction:
        """x0(s) = arctan(k(2s - 1)) / arctan(k), an increasing ramp onto [-1, 1] (d = 1)."""
        if not steepness > 0:
            msg = f"steepness must be positive, got {steepness}"
            raise ContractError(msg)
        scale = math.atan(steepness)

        def x0(s: FloatArray) -> FloatArray:
            return np.arctan(steepness * (2.0 * np.asarray(s).reshape(-1, 1) - 1.0)) / scale

        return x0

    @staticmethod
    def perturbation(dim: int) -> InitialFunction:
        """g_k(s) = sin(2π s_{k+1}) / (2π) with the component index taken cyclically; 1-Lipschitz."""

        def g(s: FloatArray) -> FloatArray:
            labels = np.asarray(s, dtype=np.float64).reshape(-1, dim)
            return np.sin(2.0 * math.pi * np.roll(labels, -1, axis=1)) / (2.0 * math.pi)

        return g

    @staticmethod
    def affine_matrix(dim: int, entries: Sequence[float] | None) -> FloatArray:
        values = DEFAULT_MATRIX if entries is None and dim == 2 else entries
        if values is None:
            return np.eye(dim)
        matrix = np.asarray(values, dtype=np.float64)
        if matrix.size != dim * dim:
            msg = f"matrix needs {dim * dim} entries, got {matrix.size}"
            raise ContractError(msg)
        return matrix.reshape(dim, dim)

    @staticmethod
    def affine_certificate(matrix: FloatArray, epsilon: float) -> tuple[float, float]:
        """
        Certified (lower, upper) distortion constants of x0 = A s + ε g(s):
        1/||A^-1|| - ε and ||A|| + ε in the spectral norm.

        Raises:
            PreconditionError: If A is singular or ε >= 1/(2||A^-1||)
        """
        if abs(np.linalg.det(matrix)) < 1e-14:
            msg = "affine part of the initial opinions is singular"
            raise PreconditionError(msg)
        inverse_norm = float(np.linalg.norm(np.linalg.inv(matrix), 2))
        if not 0 <= epsilon < 1.0 / (2.0 * inverse_norm):
            msg = f"epsilon={epsilon} must lie in [0, {1.0 / (2.0 * inverse_norm):.6g})"
            raise PreconditionError(msg)
        return 1.0 / inverse_norm - epsilon, float(np.linalg.norm(matrix, 2)) + epsilon

    @staticmethod
    def affine(dim: int, matrix: Sequence[float] | None = None, epsilon: float = 0.1) -> InitialFunction:
        """x0(s) = A s + ε g(s); bi-Lipschitz for ε < 1/(2||A^-1||)."""
        a = InitialData.affine_matrix(dim, matrix)
        InitialData.affine_certificate(a, epsilon)
        g = InitialData.perturbation(dim)

        def x0(s: FloatArray) -> FloatArray:
            labels = np.asarray(s, dtype=np.float64).reshape(-1, dim)
            return labels @ a.T + epsilon * g(labels)

        return x0

    @staticmethod
    def cells(values: Sequence[float], dim: int, components: int | None = None) -> InitialFunction:
        """
        The step function taking given values on the cells of a uniform grid.

        Args:
            values: Flat list in labelling order; opinions are (component-major per cell) of length N^d·d
            dim: d
            components: d for opinions, None for a scalar mass density
        """
        array = np.asarray(values, dtype=np.float64)
        width = components or 1
        if array.size % width:
            msg = f"{array.size} values do not split into cells of {width} components"
            raise ContractError(msg)
        side = perfect_root(array.size // width, dim)
        table = array.reshape(-1, width) if components else array
        labeling = CubeLabeling(dim, side)

        def f(s: FloatArray) -> FloatArray:
            return table[labeling.cell_of(np.asarray(s, dtype=np.float64).reshape(-1, dim))]

        return f

    @staticmethod
    def uniform_mass() -> InitialFunction:
        """m0 ≡ 1."""

        def m0(s: FloatArray) -> FloatArray:
            return np.ones(np.asarray(s).shape[0])

        return m0

    @staticmethod
    def sine_mass(dim: int, amplitude: float = 0.5) -> InitialFunction:
        """m0(s) = 1 + a·prod_k sin(2π s_k); unit integral, values in [1 - |a|, 1 + |a|]."""
        if not abs(amplitude) < 1:
            msg = f"amplitude must lie in (-1, 1), got {amplitude}"
            raise ContractError(msg)

        def m0(s: FloatArray) -> FloatArray:
            labels = np.asarray(s, dtype=np.float64).reshape(-1, dim)
            return 1.0 + amplitude * np.prod(np.sin(2.0 * math.pi * labels), axis=1)

        return m0

    @staticmethod
    def opinions(family: str, dim: int, **params: Any) -> InitialFunction:
        """
        Build an opinion family by name.

        Raises:
            ContractError: If the family is unknown or does not exist in dimension d
        """
        if family == "identity":
            return InitialData.identity(dim)
        if family == "arctan":
            if dim != 1:
                msg = "the arctan family is one-dimensional"
                raise ContractError(msg)
            return InitialData.arctan(params.get("steepness", 4.0))
        if family == "affine":
            return InitialData.affine(dim, params.get("matrix"), params.get("epsilon", 0.1))
        if family == "cells":
            return InitialData.cells(params["values"], dim, components=dim)
        msg = f"unknown opinion family {family!r}; expected one of {InitialData.OPINION_FAMILIES}"
        raise ContractError(msg)

    @staticmethod
    def masses(family: str, dim: int, **params: Any) -> InitialFunction:
        """Build a mass family by name."""
        if family == "uniform":
            return InitialData.uniform_mass()
        if family == "sine":
            return InitialData.sine_mass(dim, params.get("amplitude", 0.5))
        if family == "cells":
            return InitialData.cells(params["values"], dim)
        msg = f"unknown mass family {family!r}; expected one of {InitialData.MASS_FAMILIES}"
        raise ContractError(msg)

    @staticmethod
    def bilipschitz_constants(
        x0: InitialFunction,
        dim: int,
        rng: np.random.Generator,
        samples: int = 4000,
    ) -> tuple[float, float]:
        """
        Sampled (min, max) of |x0(s) - x0(s')| / |s - s'| over random label pairs.

        The result brackets from inside the true constants (1/L0, L0) of a bi-Lipschitz map.
        """
        s = rng.uniform(0.0, 1.0, size=(samples, dim))
        t = rng.uniform(0.0, 1.0, size=(samples, dim))
        distance = np.linalg.norm(s - t, axis=-1)
        keep = distance > 1e-9
        ratios = np.linalg.norm(x0(s) - x0(t), axis=-1)[keep] / distance[keep]
        return float(np.min(ratios)), float(np.max(ratios))
