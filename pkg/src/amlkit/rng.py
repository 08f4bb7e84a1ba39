"""Deterministic random-stream derivation.

Every stochastic component draws from a generator derived from the single
run seed plus a fixed integer path, so outputs are reproducible and
independent components never share a stream.
"""

from __future__ import annotations

import numpy as np

# Stream namespaces. Values are arbitrary but frozen: changing them
# changes every generated dataset.
POPULATION = 1
NETWORK = 2
DAY = 3
EPISODE = 4
PATTERN = 5
DETECTION = 6
SPLIT = 7
EVALUATION = 8


def substream(seed: int, *path: int) -> np.random.Generator:
    """Return a generator for the given seed and integer path."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFF, *[int(p) & 0xFFFFFFFF for p in path]])
    return np.random.default_rng(ss)
