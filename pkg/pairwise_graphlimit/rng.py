"""
rng module - Reproducible random streams

Streams are Philox counter-based generators keyed by (seed, stream key), so the
numbers a task draws depend only on the seed and the task's key, never on how
many tasks run or in which order.

This module is licensed under the MIT License.
"""

import numpy as np

from pairwise_graphlimit.dynamics import DiscreteState

DEFAULT_SEED = 20250101


class RandomStreams:
    """
    Independent generators split from one recorded seed.

    Examples:
        >>> streams = RandomStreams(7)
        >>> a = streams.generator(3)
        >>> b = RandomStreams(7).generator(3)   # same numbers as a
    """

    def __init__(self, seed: int = DEFAULT_SEED) -> None:
        if seed < 0 or seed >= 2**64:
            msg = f"seed must be an unsigned 64-bit integer, got {seed}"
            raise ValueError(msg)
        self.seed = int(seed)

    def generator(self, *key: int) -> np.random.Generator:
        """Generator for the stream identified by key."""
        sequence = np.random.SeedSequence(self.seed, spawn_key=tuple(int(k) for k in key))
        return np.random.Generator(np.random.Philox(sequence))

    def spawn(self, count: int) -> list[np.random.Generator]:
        return [self.generator(index) for index in range(count)]

    def __repr__(self) -> str:
        return f"RandomStreams(seed={self.seed})"


def random_state(
    rng: np.random.Generator,
    count: int,
    dim: int,
    *,
    spread: float = 2.0,
    mass_spread: float = 0.5,
) -> DiscreteState:
    """
    A valid random state: opinions uniform in [-spread, spread]^d, masses in
    [1 - mass_spread, 1 + mass_spread] rescaled to unit mean.
    """
    positions = rng.uniform(-spread, spread, size=(count, dim))
    masses = rng.uniform(1.0 - mass_spread, 1.0 + mass_spread, size=count)
    masses = masses / np.mean(masses)
    return DiscreteState(time=0.0, positions=positions, masses=masses)
