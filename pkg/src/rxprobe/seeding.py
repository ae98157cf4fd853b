"""Hierarchical, counter-based seed derivation.

Every random stream is addressed by a root seed plus an integer path, e.g.
``(root, STREAM_CHANNEL, episode, iteration, item)``. Streams for different
paths are statistically independent and a stream never depends on how many
siblings were drawn, so batch sizes can change without perturbing item ``i``.
"""
from __future__ import annotations

import numpy as np

# stream tags (first path component)
STREAM_CHANNEL = 1
STREAM_PAYLOAD = 2
STREAM_EPISODE = 3
STREAM_VALIDATION = 4
STREAM_GRID = 5
STREAM_TRAIN = 6
STREAM_INIT = 7
STREAM_PILOTS = 8


def rng(root: int, *path: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(root), spawn_key=tuple(int(p) for p in path)))


def derive(root: int, *path: int) -> int:
    """A 63-bit child seed for ``path`` under ``root``."""
    ss = np.random.SeedSequence(int(root), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
