"""Seeded random streams for reproducible experiments.

Every stream is a numpy ``Generator`` over the PCG64 bit generator, keyed by
a 64-bit seed plus a slash-separated stream label. The label is hashed with
BLAKE2b into the ``SeedSequence`` spawn key, so ``SeededRng(7, "oracle")`` and
``SeededRng(7, "encode")`` are independent while each is reproducible.
"""

from __future__ import annotations

import hashlib

import numpy as np

SEED_MASK = (1 << 64) - 1
GENERATOR_NAME = "numpy.PCG64/SeedSequence+blake2b-label"


def _label_key(label: str) -> tuple[int, ...]:
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=16).digest()
    return tuple(int.from_bytes(digest[i:i + 4], "big") for i in range(0, 16, 4))


class SeededRng:
    def __init__(self, seed: int, label: str = "root"):
        self._seed = seed & SEED_MASK
        self._label = label
        sequence = np.random.SeedSequence(self._seed, spawn_key=_label_key(label))
        self._gen = np.random.Generator(np.random.PCG64(sequence))

    @property
    def seed(self) -> int:
        return self._seed

    @property
    def label(self) -> str:
        return self._label

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def stream(self, label: str) -> SeededRng:
        """Derive an independent child stream; depends only on seed and labels."""
        return SeededRng(self._seed, f"{self._label}/{label}")

    def below(self, bound: int) -> int:
        return int(self._gen.integers(0, bound, dtype=np.uint64))

    def below_many(self, bound: int, count: int) -> list[int]:
        if count == 0:
            return []
        return self._gen.integers(0, bound, size=count, dtype=np.uint64).tolist()

    def random(self) -> float:
        return float(self._gen.random())

    def __repr__(self) -> str:
        return f"SeededRng(seed={self._seed}, label={self._label!r})"
