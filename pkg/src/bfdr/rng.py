"""Deterministic substream seeding.

Every stochastic component in this package draws from a counter-based
generator (Philox) keyed by a stable hash of a base seed plus a tuple of
tags (a test id, a gene index, a purpose label). Two properties follow:

* the stream for a given (seed, tags) is identical across runs, platforms,
  and process/thread layouts, because the key depends only on the values;
* distinct tags give statistically independent streams, so work can be
  farmed out per test or per gene in any order without changing results.
"""
from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["substream", "derive_seed"]


def derive_seed(seed: int, *tags: object) -> int:
    """A 63-bit integer seed derived stably from (seed, *tags).

    Used to give each replicate or study arm its own base seed without
    the caller inventing ad hoc offsets that might collide.
    """
    material = repr((int(seed),) + tags).encode("utf-8")
    return int.from_bytes(hashlib.sha256(material).digest()[16:24], "little") >> 1


def substream(seed: int, *tags: object) -> np.random.Generator:
    """Return a generator keyed by a stable hash of (seed, *tags).

    Tags may be ints or strings (anything with a stable repr). The 128-bit
    Philox key is the truncated SHA-256 of the repr, so changing any tag or
    the seed yields an unrelated stream.
    """
    material = repr((int(seed),) + tags).encode("utf-8")
    key = int.from_bytes(hashlib.sha256(material).digest()[:16], "little")
    return np.random.Generator(np.random.Philox(key=key))
