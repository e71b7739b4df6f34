"""Seeded random streams.

Every consumer of randomness asks for its own stream, keyed by a purpose id
and the indices that identify the work item (candidate k, trial b, ...). The
stream for a key depends only on ``(seed, key)``, so results do not depend on
evaluation order or on how work is split across threads.
"""

import numpy as np

SYNTHETIC = 0
SUBSAMPLE = 1
KMEANS = 2
FULL_DATA = 3
GAP_REFERENCE = 4
CONVERGENCE = 5
RUNTIME = 6
SPLIT_CALIBRATION = 7


def stream(seed: int, *key: int) -> np.random.Generator:
    """PCG64 generator for ``(seed, key)``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(x) for x in key))
    return np.random.Generator(np.random.PCG64(ss))
