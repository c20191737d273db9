"""Deterministic pseudo-random generator used for all sampling.

SplitMix64: a 64-bit counter stepped by a fixed odd increment and passed
through the finalizer of Steele, Lea and Flood ("Fast splittable
pseudorandom number generators", OOPSLA 2014).  Implemented here rather
than taken from the stdlib because seeded integer draws must stay identical
across interpreter versions and platforms for experiments to be replayable.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    """Seeded 64-bit generator; same seed always yields the same stream."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) via rejection sampling (no modulo bias)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            v = self.next_u64()
            if v < limit:
                return v % n

    def randbytes(self, count: int) -> bytes:
        out = bytearray()
        while len(out) < count:
            out += self.next_u64().to_bytes(8, "big")
        return bytes(out[:count])
