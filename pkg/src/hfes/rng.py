"""Deterministic random substreams.

Every random draw in the package comes from a generator keyed by
``(master seed, *integer keys)`` through ``numpy.random.SeedSequence``, so
results never depend on call order or on how work is split across threads.
"""

from __future__ import annotations

import numpy as np

# stream tags; reusing a tag across parameter settings gives common random numbers
POLICY = 1
ERRORS = 2
SHOCKS = 3
LEAKAGE = 4
FIXTURE = 5


def substream(seed: int, *keys: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def standard_normal_rows(seed: int, tag: int, rows: int, cols: int) -> np.ndarray:
    """``rows`` x ``cols`` standard normals; row ``r`` depends only on (seed, tag, r)."""
    out = np.empty((rows, cols))
    for r in range(rows):
        out[r] = substream(seed, tag, r).standard_normal(cols)
    return out
