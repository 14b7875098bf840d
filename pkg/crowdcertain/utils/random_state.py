"""Seeded random streams keyed by (seed, purpose)."""

import zlib

import numpy as np


def make_rng(seed: int, purpose: str) -> np.random.Generator:
    """Independent generator for one purpose under a run seed.

    Distinct purposes never share draws, so e.g. adding workers to a panel
    leaves the instance-level draws untouched.
    """
    tag = zlib.crc32(purpose.encode('utf-8'))
    return np.random.default_rng(np.random.SeedSequence([int(seed), tag]))


def derive_seed(seed: int, purpose: str) -> int:
    """32-bit integer seed for libraries that take ``random_state`` ints."""
    return int(make_rng(seed, purpose).integers(0, 2**31 - 1))
