"""Derived random streams.

Every stream is a PCG64 generator seeded from a ``numpy.random.SeedSequence``
whose entropy is the user seed and whose spawn key encodes the trial number
and a purpose label.  Streams therefore do not depend on evaluation order or
on how many trials run in parallel.
"""

from __future__ import annotations

import zlib

import numpy as np


def _purpose_key(purpose: str) -> int:
    return zlib.crc32(purpose.encode())


def rng_for(seed: int, purpose: str, *trial: int) -> np.random.Generator:
    key = (*(int(t) for t in trial), _purpose_key(purpose))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed) % 2**64, spawn_key=key)))
