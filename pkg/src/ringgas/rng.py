"""Deterministic seed derivation for replica and purpose streams.

Every random draw in the package comes from a ``numpy.random.Generator``
backed by PCG64.  Child seeds are obtained by feeding ``(master_seed, *key)``
through ``numpy.random.SeedSequence`` (whose hash-based entropy pool is the
mixing function) and reading back one 64-bit word.
"""

import numpy as np

SCATTERERS = 0
OCCUPATIONS = 1

_MASK64 = (1 << 64) - 1


def mix_seed(master_seed, *key):
    """Return a 64-bit seed derived from ``master_seed`` and integer ``key``."""
    ss = np.random.SeedSequence(int(master_seed) & _MASK64,
                                spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(int(seed) & _MASK64))
