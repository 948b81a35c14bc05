"""Random-stream helpers shared across modules."""

from __future__ import annotations

import numpy as np


def as_generator(rng=None) -> np.random.Generator:
    """Accept None, an int seed, a SeedSequence, or a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, np.random.RandomState):
        return np.random.default_rng(rng.randint(0, 2**31 - 1, size=4))
    return np.random.default_rng(rng)


def trial_seed(master_seed: int, *key: int) -> np.random.SeedSequence:
    """Stream for one work item, derived from the master seed and an index key.

    The stream depends only on (master_seed, key), never on execution order.
    """
    return np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
