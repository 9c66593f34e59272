"""Seeded, counter-based random streams.

Every stream is a Philox generator keyed by the user seed.  Substreams are
carved out of the 256-bit counter space by putting the stream index in the
top 64 bits, so stream ``s`` of seed ``seed`` never overlaps stream ``s'``
unless more than 2**192 blocks are drawn.
"""

import numpy as np

_MASK64 = (1 << 64) - 1


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be non-negative")
    stream = int(stream) & _MASK64
    return np.random.Generator(np.random.Philox(key=seed, counter=stream << 192))
