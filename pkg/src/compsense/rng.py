"""Portable seeded random streams.

All randomness in the package goes through :class:`SplitMix64` so that a
seed reproduces the same numbers on any platform (and in any language that
implements the same algorithm). The generator is Steele, Lea & Flood's
SplitMix64:

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)

Doubles use the top 53 bits: ``(u >> 11) * 2**-53``, which lies in [0, 1).
Bounded integers use rejection sampling on the raw 64-bit output, so they
are exactly uniform.

Per-trial streams come from :func:`derive_seed`:
``derive_seed(seed, index) = seed XOR mix64(index + 0x9E3779B97F4A7C15)``,
where ``mix64`` is the SplitMix64 output function.
"""
import math

import numpy as np

from compsense._backend import splitmix64_fill

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_TWO_M53 = 2.0 ** -53


def mix64(z):
    """SplitMix64 output function on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed, index):
    """Seed for sub-stream ``index`` of ``seed``."""
    return (int(seed) & MASK64) ^ mix64(int(index) + GOLDEN_GAMMA)


class SplitMix64:
    """Stateful SplitMix64 stream."""

    def __init__(self, seed=0):
        self.seed = int(seed) & MASK64
        self.state = self.seed

    def next_u64(self, count=None):
        """Raw 64-bit outputs; a Python int when ``count`` is None."""
        n = 1 if count is None else int(count)
        out, self.state = splitmix64_fill(self.state, n)
        return int(out[0]) if count is None else out

    def random(self, count=None):
        """Uniform doubles on [0, 1)."""
        n = 1 if count is None else int(count)
        raw = self.next_u64(n)
        out = (raw >> np.uint64(11)).astype(np.float64) * _TWO_M53
        return float(out[0]) if count is None else out

    def below(self, bound):
        """Uniform integer in ``[0, bound)``."""
        bound = int(bound)
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % bound

    def sample(self, population, size):
        """``size`` distinct indices drawn uniformly from ``range(population)``.

        Partial Fisher-Yates; the result is in draw order.
        """
        population, size = int(population), int(size)
        if not 0 <= size <= population:
            raise ValueError("sample size out of range")
        pool = list(range(population))
        for i in range(size):
            j = i + self.below(population - i)
            pool[i], pool[j] = pool[j], pool[i]
        return np.array(pool[:size], dtype=np.int64)

    def permutation(self, n):
        return self.sample(n, n)

    def signs(self, count):
        """Independent fair +/-1 values."""
        bits = self.next_u64(count) >> np.uint64(63)
        return np.where(bits == 1, -1.0, 1.0)

    def unit_disk(self, count):
        """Complex points uniform on the closed unit disk."""
        r = np.sqrt(self.random(count))
        phase = 2.0 * math.pi * self.random(count)
        return r * np.exp(1j * phase)
