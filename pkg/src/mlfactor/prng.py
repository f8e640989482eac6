"""Seeded, platform-independent pseudo-random generator.

The algorithm is xoshiro256** (Blackman & Vigna) with its 256-bit state filled
from a 64-bit seed by SplitMix64. Every output is a pure function of the seed,
so corpora and training runs replay bit-for-bit on any machine.
"""
from __future__ import annotations

from typing import MutableSequence

import numpy as np

_MASK = (1 << 64) - 1


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK


def splitmix64(state: int) -> tuple[int, int]:
    """One SplitMix64 step; returns ``(new_state, output)``."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


class Prng:
    """xoshiro256** generator. Not thread-safe; give each worker its own."""

    __slots__ = ("_s",)

    def __init__(self, seed: int):
        sm = seed & _MASK
        s = []
        for _ in range(4):
            sm, out = splitmix64(sm)
            s.append(out)
        self._s = s

    @classmethod
    def from_state(cls, state) -> "Prng":
        """Build a generator from four raw 64-bit state words (not all zero)."""
        s = [int(w) & _MASK for w in state]
        if len(s) != 4 or not any(s):
            raise ValueError("state must be four words, not all zero")
        rng = cls.__new__(cls)
        rng._s = s
        return rng

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & _MASK, 7) * 9) & _MASK
        t = (s[1] << 17) & _MASK
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def getrandbits(self, k: int) -> int:
        """Uniform integer in [0, 2**k), built from 64-bit words, high word first."""
        if k <= 0:
            return 0
        words = (k + 63) // 64
        x = 0
        for _ in range(words):
            x = (x << 64) | self.next_u64()
        return x >> (words * 64 - k)

    def uniform_int(self, lo: int, hi: int) -> int:
        """Unbiased integer in [lo, hi] inclusive, by rejection sampling."""
        if hi < lo:
            raise ValueError("empty range")
        span = hi - lo
        if span == 0:
            return lo
        k = span.bit_length()
        while True:
            x = self.getrandbits(k)
            if x <= span:
                return lo + x

    def random(self) -> float:
        """Double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def shuffle(self, seq: MutableSequence) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(seq) - 1, 0, -1):
            j = self.uniform_int(0, i)
            seq[i], seq[j] = seq[j], seq[i]

    def numpy_generator(self) -> np.random.Generator:
        """Child numpy generator for bulk draws (weights, dropout masks, batch order)."""
        return np.random.Generator(np.random.PCG64(self.getrandbits(128)))
