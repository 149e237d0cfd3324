"""Counter-based random streams.

Every stream is a Philox generator keyed by ``(seed, *keys)``, so work split
across chunks or threads draws the same numbers regardless of scheduling.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, *keys: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))
