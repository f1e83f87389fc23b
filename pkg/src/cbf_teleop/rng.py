"""Seeded deterministic random numbers (SplitMix64).

SplitMix64 is the generator used everywhere randomness is needed so that
environments and trial logs reproduce bit-for-bit on any platform: the
state update is pure 64-bit integer arithmetic and the float conversion
uses the top 53 bits, both exact under IEEE-754 doubles.

Reference: Steele, Lea & Flood, "Fast splittable pseudorandom number
generators" (the SplitMix64 finalizer, same constants as java.util.SplittableRandom).
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV_2_53 = 2.0 ** -53


class SplitMix64:
    """64-bit SplitMix64 stream seeded with an unsigned 64-bit integer."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        """Next raw 64-bit output."""
        self._state = (self._state + _GOLDEN) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform double in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * _INV_2_53

    def uniform(self, lo: float, hi: float) -> float:
        """Uniform double in [lo, hi)."""
        return lo + (hi - lo) * self.random()
