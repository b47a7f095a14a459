"""Seeded random streams.

Every stream is a Philox-4x64 counter-based generator keyed by
``SeedSequence(seed, spawn_key=(stream, *extra))``.  Given the same
``(seed, stream, extra)`` triple the draws are identical on every platform
numpy supports, and distinct streams never share state.
"""

import numpy as np

PARTITION = 1
INIT = 2
RECOVERY = 3
LOWRANK = 10
GAUSSIAN = 11
RADEMACHER = 20
BENCH = 30


def make_rng(seed, stream, *extra):
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream), *map(int, extra)))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed, stream, *extra):
    """A 63-bit child seed, used where a plain integer has to be recorded."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream), *map(int, extra)))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
