"""Counter-based random streams.

Every (seed, purpose, round) triple owns an independent Philox stream: the
key is derived from the seed and purpose, the counter from the round index.
Environment draws are therefore shared by all learners run with the same seed,
and any single round can be replayed without touching the others.
"""
from __future__ import annotations

import hashlib

import numpy as np

PURPOSES = ("env", "algo")


def stream_key(seed: int, purpose: str) -> int:
    h = hashlib.blake2b(f"{int(seed)}/{purpose}".encode(), digest_size=16)
    return int.from_bytes(h.digest(), "little")


def substream(seed: int, purpose: str, index: int) -> np.random.Generator:
    """Generator for round ``index``; the round number occupies the high counter word."""
    if index < 0:
        raise ValueError("round index must be non-negative")
    bitgen = np.random.Philox(key=stream_key(seed, purpose), counter=[0, 0, 0, int(index)])
    return np.random.Generator(bitgen)


class Streams:
    """Convenience wrapper holding the seed of one run."""

    def __init__(self, seed: int):
        self.seed = int(seed)

    def env(self, t: int) -> np.random.Generator:
        return substream(self.seed, "env", t)

    def algo(self, t: int) -> np.random.Generator:
        return substream(self.seed, "algo", t)
