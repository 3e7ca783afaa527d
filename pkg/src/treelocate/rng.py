"""Deterministic random-stream derivation for reproducible experiments.

Each simulation trial receives its own counter-based generator derived
from (master seed, index path), so results are identical for any worker
count and independent of execution order.
"""

from __future__ import annotations

import numpy as np


def trial_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Generator for one unit of work.

    ``key`` is an index path, e.g. ``(cell, trial)``; distinct paths give
    statistically independent Philox streams.
    """
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))
