"""Counter-style random streams.

Every stream is identified by a master seed and a tuple of integer keys
(scenario id, run index, replicate index, ...). Streams never share state, so
results do not depend on how work is split across processes.
"""

from __future__ import annotations

import zlib

import numpy as np


def stream(seed: int, *keys: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *keys: int) -> int:
    """A 64-bit seed for a nested stream family."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return int(lo) | (int(hi) << 32)


def stable_id(text: str) -> int:
    return zlib.crc32(text.encode("utf-8"))
