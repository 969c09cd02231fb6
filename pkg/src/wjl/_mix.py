"""Deterministic 64-bit mixing used for seeding and counter-based generation.

All array functions operate on uint64 numpy arrays and rely on wrap-around
(mod 2^64) arithmetic, which numpy performs silently for arrays.
"""

from __future__ import annotations

import numpy as np

U64_MASK = (1 << 64) - 1

GOLDEN = 0x9E3779B97F4A7C15
ROW_MULT = 0xC2B2AE3D27D4EB4F
COL_MULT = 0x165667B19E3779F9

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def finalize_array(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer over a uint64 array."""
    z = np.asarray(z).astype(np.uint64, copy=True)
    if z.ndim == 0:
        # numpy warns on scalar wrap-around; go through Python ints instead
        return np.uint64(finalize(int(z)))
    z ^= z >> np.uint64(30)
    z *= _M1
    z ^= z >> np.uint64(27)
    z *= _M2
    z ^= z >> np.uint64(31)
    return z


def finalize(z: int) -> int:
    """SplitMix64 finalizer for a single Python integer."""
    z &= U64_MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & U64_MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & U64_MASK
    return z ^ (z >> 31)


def mix2(seed: int, a: int, b: int) -> int:
    """Collision-resistant mix of a seed with two small indices."""
    return finalize(seed ^ ((a * GOLDEN) & U64_MASK) ^ ((b * ROW_MULT) & U64_MASK))
