"""
Seeded randomness.

Every random draw in the project comes from numpy's PCG64 bit generator, whose algorithm and output stream
are fixed and documented, so results are reproducible across machines. Independent sub-streams are derived
from one master seed with `SeedSequence(master, spawn_key=(stream,))`.
"""
from enum import IntEnum

import numpy as np


class SeedStream(IntEnum):
    FOLDS = 0
    VALIDATION = 1
    INIT = 2
    SHUFFLE = 3
    DROPOUT = 4
    BKT = 5
    SYNTHETIC = 6


def make_rng(seed: int, stream: SeedStream | None = None) -> np.random.Generator:
    if stream is None:
        sequence = np.random.SeedSequence(seed)
    else:
        sequence = np.random.SeedSequence(seed, spawn_key=(int(stream),))
    return np.random.Generator(np.random.PCG64(sequence))


def derive_seed(master_seed: int, stream: SeedStream) -> int:
    """A 32-bit seed for `stream`, independent of the other streams of the same master seed."""
    sequence = np.random.SeedSequence(master_seed, spawn_key=(int(stream),))
    return int(sequence.generate_state(1, dtype=np.uint32)[0])
