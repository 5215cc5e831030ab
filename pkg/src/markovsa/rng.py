"""Seeded uniform streams with named, disjoint sub-streams."""
from __future__ import annotations

import zlib
from typing import Hashable

import numpy as np


def _key_to_int(key: Hashable) -> int:
    if isinstance(key, (int, np.integer)):
        if key < 0:
            raise ValueError("stream keys must be nonnegative")
        return int(key)
    return zlib.crc32(str(key).encode("utf-8"))


class RngStream:
    """Deterministic source of uniforms.

    Two streams built from the same ``(seed, path)`` produce identical
    sequences. Sub-streams are derived through ``numpy.random.SeedSequence``
    spawn keys, so ``stream.child("a")`` and ``stream.child("b")`` are
    statistically independent and never overlap in practice.
    """

    def __init__(self, seed: int = 0, path: tuple = ()):
        self.seed = int(seed)
        self.path = tuple(_key_to_int(k) for k in path)
        ss = np.random.SeedSequence(self.seed, spawn_key=self.path)
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def child(self, *keys: Hashable) -> "RngStream":
        return RngStream(self.seed, self.path + tuple(_key_to_int(k) for k in keys))

    def uniforms(self, *shape: int) -> np.ndarray:
        """Float64 uniforms on [0, 1) with the given shape."""
        return self.generator.random(shape if shape else None)

    def uniform(self) -> float:
        return float(self.generator.random())

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, path={self.path})"


def as_stream(rng) -> RngStream:
    """Accept an RngStream, an int seed or None."""
    if isinstance(rng, RngStream):
        return rng
    if rng is None:
        return RngStream(0)
    return RngStream(int(rng))
