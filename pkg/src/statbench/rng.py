"""Seeding policy.

One generator family is used everywhere: PCG64 behind
``numpy.random.Generator``.  All replicate / restart / split randomness is
derived by hashing ``(master_seed, *key)`` through ``numpy.random.SeedSequence``,
so distinct keys give statistically independent streams and identical keys
reproduce bit-identical draws.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Generator for stream ``key`` derived from ``seed``."""
    ss = np.random.SeedSequence([int(seed), *[int(k) for k in key]])
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *key: int) -> int:
    """64-bit child seed for handing to APIs that take plain integers."""
    ss = np.random.SeedSequence([int(seed), *[int(k) for k in key]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
