"""
pairwise-graphlimit - Weighted pairwise opinion dynamics and their graph limits

This package simulates the particle system

    dx_i/dt = (1/P) sum_j m_j a(x_j - x_i)
    dm_i/dt = (m_i / (2P^2)) sum_{j,k} m_j m_k (a(x_k - x_i) + a(x_k - x_j))·s(x_i - x_j)

solves its continuum graph limit on uniform grids (directly and by Picard
iteration), and measures how particle systems converge to the limit.

Main Features:
- Factorised O(P^2) weight right-hand side with an O(P^3) brute-force oracle
- Fixed-step RK4 / Euler integration with invariant monitoring
- Graph-limit solvers on K^d grids, including windowed Picard iteration
- Convergence functionals (xi, zeta, g_N) and Wasserstein-1 distances
- Study runners and a command-line interface with reproducible outputs

Example Usage:
    >>> from pairwise_graphlimit import DiscreteState, InfluenceKernel, SignMap, rhs_positions, rhs_masses
    >>> state = DiscreteState.create([[-1.0], [1.0]], [1.5, 0.5])
    >>> v = rhs_positions(state, InfluenceKernel.linear())
    >>> rhs_masses(state, v, SignMap(1))
    array([ 0.1875, -0.1875])

This module is licensed under the MIT License.
"""

__version__ = "2025.0.1"

from pairwise_graphlimit.dynamics import (
    DiscreteState,
    Dynamics,
    rhs_masses,
    rhs_masses_bruteforce,
    rhs_positions,
)
from pairwise_graphlimit.embedding import ConvergenceReport, Embedding, NormKind
from pairwise_graphlimit.errors import (
    CapacityError,
    CollapseError,
    ConfigError,
    ContractError,
    DomainError,
    GraphLimitError,
    InvariantViolation,
    PreconditionError,
    QuadratureError,
    SolverError,
    WindowTooLongError,
)
from pairwise_graphlimit.graph_limit import GraphLimit
from pairwise_graphlimit.grid import ContinuumTrajectory, GridFunction
from pairwise_graphlimit.integrator import Integrator, IntegratorConfig, IntegratorScheme, Trajectory
from pairwise_graphlimit.kernels import (
    InfluenceKernel,
    KernelKind,
    ModelParams,
    SignKind,
    SignMap,
    eval_influence,
    eval_sign,
)
from pairwise_graphlimit.labeling import CubeLabeling
from pairwise_graphlimit.meanfield import AtomicMeasure, MeanField
from pairwise_graphlimit.picard import PicardConfig, PicardSolver

__all__ = [
    "AtomicMeasure",
    "CapacityError",
    "CollapseError",
    "ConfigError",
    "ContinuumTrajectory",
    "ContractError",
    "ConvergenceReport",
    "CubeLabeling",
    "DiscreteState",
    "DomainError",
    "Dynamics",
    "Embedding",
    "GraphLimit",
    "GraphLimitError",
    "GridFunction",
    "InfluenceKernel",
    "Integrator",
    "IntegratorConfig",
    "IntegratorScheme",
    "InvariantViolation",
    "KernelKind",
    "MeanField",
    "ModelParams",
    "NormKind",
    "PicardConfig",
    "PicardSolver",
    "PreconditionError",
    "QuadratureError",
    "SignKind",
    "SignMap",
    "SolverError",
    "Trajectory",
    "WindowTooLongError",
    "eval_influence",
    "eval_sign",
    "rhs_masses",
    "rhs_masses_bruteforce",
    "rhs_positions",
]
