"""Seed derivation shared by every stochastic routine.

A run is driven by one 64-bit master seed. Each independent stream (a
population, a network, an activity mask, a market ordering...) gets its own
seed derived from the master seed and a tuple of tags::

    state = master_seed
    for tag in tags:
        state = splitmix64(state ^ tag_word(tag))

``tag_word`` maps an int to itself modulo 2**64 and anything else to the
first 8 bytes (little endian) of ``blake2b(str(tag).encode(), digest_size=8)``.
``splitmix64`` is the standard finalizer of Steele, Lea and Flood's SplitMix64
generator. Derived seeds feed ``numpy.random.PCG64``.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def tag_word(tag) -> int:
    if isinstance(tag, (bool, np.bool_)):
        return int(tag)
    if isinstance(tag, (int, np.integer)):
        return int(tag) & MASK64
    digest = hashlib.blake2b(str(tag).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def derive_seed(master_seed: int, *tags) -> int:
    """Derive a 64-bit seed from ``master_seed`` and an ordered tag tuple."""
    state = int(master_seed) & MASK64
    for tag in tags:
        state = splitmix64(state ^ tag_word(tag))
    return state


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & MASK64))
