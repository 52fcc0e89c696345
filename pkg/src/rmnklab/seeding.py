"""Deterministic seed derivation.

All randomness in the package flows from 64-bit seeds combined with
``mix64``, a chained SplitMix64 finalizer:

    h = 0x9E3779B97F4A7C15
    for part in parts:
        h = splitmix64(h ^ (part mod 2**64))

``splitmix64(z)`` adds the golden-ratio increment and applies the
(30, 27, 31) xor-shift/multiply finalizer. Negative integers are reduced
modulo 2**64 so signed identifiers (e.g. scaled correlations) are accepted.
Generators are Philox (counter based) keyed through ``numpy.random.SeedSequence``.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(z: int) -> int:
    z = (z + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix64(*parts: int) -> int:
    """Combine integer identifiers into one 64-bit seed."""
    h = _GOLDEN
    for part in parts:
        h = splitmix64(h ^ (int(part) & MASK64))
    return h


def philox(seed: int, *stream: int) -> np.random.Generator:
    """Philox generator for ``seed`` and an optional substream key."""
    ss = np.random.SeedSequence(int(seed) & MASK64, spawn_key=tuple(int(s) & MASK64 for s in stream))
    return np.random.Generator(np.random.Philox(ss))
