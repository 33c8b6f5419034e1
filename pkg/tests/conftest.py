"""
Shared fixtures for the pairwise-graphlimit tests.

This module is licensed under the MIT License.
"""

import numpy as np
import pytest

from pairwise_graphlimit import DiscreteState, InfluenceKernel, SignMap
from pairwise_graphlimit.rng import RandomStreams


@pytest.fixture
def streams():
    return RandomStreams(7)


@pytest.fixture
def rng(streams):
    return streams.generator(0)


@pytest.fixture
def linear():
    return InfluenceKernel.linear()


@pytest.fixture
def zero_kernel():
    return InfluenceKernel.custom(np.zeros_like, lipschitz=0.0)


@pytest.fixture
def sign1():
    return SignMap(1)


@pytest.fixture
def asymmetric_pair():
    """Opinions (-1, 1) with masses (1.5, 0.5)."""
    return DiscreteState.create([[-1.0], [1.0]], [1.5, 0.5])
