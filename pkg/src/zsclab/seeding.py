"""Seed derivation shared by training pools and cross-play matrices."""

from __future__ import annotations

MASK64 = (1 << 64) - 1


def mix64(x: int) -> int:
    """64-bit avalanche finalizer (the SplitMix64 output mix)."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def pairing_seed(base_seed: int, i: int, j: int) -> int:
    """Seed for cross-play cell (i, j); independent of evaluation order."""
    return mix64(mix64(base_seed ^ i) ^ j)
