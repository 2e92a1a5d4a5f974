"""Seeded randomness with a documented stream derivation.

Every random quantity in this package flows from a 64-bit seed through
``derive_key`` into a counter-based Philox generator.  ``derive_key`` folds
an arbitrary list of tags (stream names, trial indices) into the seed with
one splitmix64 round per tag, so distinct tags give independent streams and
the whole derivation is plain integer arithmetic, reproducible from the
seed alone.  Gaussian variates come from numpy's ziggurat implementation,
which is fixed for a given numpy build.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def splitmix64(x: int) -> int:
    """One output step of the splitmix64 mixer."""
    x = (x + _GOLDEN) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash of a byte stream.

    Byte-at-a-time in pure Python, so intended for desk-scale payloads
    (instance containers, config files), not bulk data.
    """
    h = FNV_OFFSET
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & _MASK64
    return h


def derive_key(seed: int, *tags: int | str) -> int:
    """Fold tags into a 64-bit key, one splitmix64 round per tag.

    String tags are hashed with FNV-1a first; integer tags are used as is
    (reduced mod 2**64).  ``derive_key(s) == splitmix64(s)``.
    """
    key = splitmix64(seed & _MASK64)
    for tag in tags:
        t = fnv1a64(tag.encode("utf-8")) if isinstance(tag, str) else tag & _MASK64
        key = splitmix64(key ^ t)
    return key


def make_generator(seed: int, *tags: int | str) -> np.random.Generator:
    """Philox generator keyed by ``derive_key(seed, *tags)``."""
    return np.random.Generator(np.random.Philox(key=derive_key(seed, *tags)))
