"""Deterministic random-stream management.

Every stochastic component in the package draws from a `numpy.random.Generator`
backed by the counter-based Philox bit generator. Streams are derived from a
single master seed plus a tuple of integer tags (channel ids, grid indices,
trial indices) folded into the `spawn_key` of a `SeedSequence`. Two streams
with different tag tuples are statistically independent, and the same
(seed, tags) pair yields a bit-identical stream on every platform and in any
execution order, which is what makes parallel trials reproducible.
"""

from __future__ import annotations

import numpy as np

# Channel tags. Covariate pairs consume two independent dither streams; the
# response channel uses a third. Data generation and sampling-pattern draws
# get their own channels so adding a new consumer never shifts existing ones.
CH_DATA = 0
CH_DITHER_X1 = 1
CH_DITHER_X2 = 2
CH_DITHER_Y = 3
CH_SAMPLING = 4


def stream(seed: int, *tags: int) -> np.random.Generator:
    """Return the Philox generator for (seed, tags)."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(t) for t in tags))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *tags: int) -> int:
    """Fold (seed, tags) into a fresh 64-bit seed for a child component."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(t) for t in tags))
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return int(lo) | (int(hi) << 32)
