"""Seeded generator streams.

Every random draw in the package goes through a :class:`numpy.random.Generator`
backed by PCG64.  Independent streams are derived from a root seed plus a
tuple of integer keys, so a task's randomness depends only on its identity
and never on scheduling order.
"""
from __future__ import annotations

import numpy as np

RNG_ALGORITHM = "PCG64/SeedSequence"
NORMAL_SAMPLER = "numpy-ziggurat"


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Return a generator for the stream ``(seed, *keys)``."""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF, *(int(k) for k in keys)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def as_rng(rng: np.random.Generator | int | None) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        raise TypeError("an explicit seed or Generator is required")
    return make_rng(int(rng))
