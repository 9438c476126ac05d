"""Deterministic RNG stream derivation.

Every random draw in the package flows from one user-supplied 64-bit root
seed. Independent work units (replica index, seed-bank index, grid index,
retry attempt) get their own stream derived from (root, *path), so results
do not depend on scheduling or on how work is chunked across processes.
"""

from __future__ import annotations

import numpy as np


def derive_seed_sequence(root_seed: int, *path: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=root_seed, spawn_key=tuple(path))


def make_rng(root_seed: int, *path: int) -> np.random.Generator:
    """Generator for the stream identified by (root_seed, *path)."""
    return np.random.Generator(np.random.PCG64(derive_seed_sequence(root_seed, *path)))
