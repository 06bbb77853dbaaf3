"""Seeded random streams.

Every run owns one ``RunRng``: a numpy Generator for bulk shuffles and a
``random.Random`` for scalar and big-integer draws.  Both are seeded from the
same 64-bit value so a run is a pure function of its seed.
"""

from __future__ import annotations

import random

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One step of the splitmix64 output function."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def run_seed(master_seed: int, index: int) -> int:
    """Seed of run ``index``: splitmix64(splitmix64(master) + index)."""
    return splitmix64((splitmix64(master_seed & MASK64) + index) & MASK64)


class RunRng:
    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self.np = np.random.default_rng(self.seed)
        self.py = random.Random(self.seed)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        return self.py.randrange(n)

    def bits(self, k: int) -> int:
        return self.py.getrandbits(k)

    def sample(self, n: int, k: int) -> list[int]:
        """k distinct values from range(n) in uniformly random order."""
        return self.py.sample(range(n), k)
