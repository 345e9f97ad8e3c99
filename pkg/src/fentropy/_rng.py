"""Counter-based pseudorandomness keyed by (seed, index).

Everything random in the package goes through ``mix64``: it is the
SplitMix64 output function evaluated at ``seed + index * GAMMA``, so the
value for any index can be produced without touching the others. The numpy
variants return the same bits as the scalar versions.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_INV53 = 1.0 / (1 << 53)


def _finalize(z: int) -> int:
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def mix64(seed: int, index: int) -> int:
    return _finalize((seed + (index + 1) * GAMMA) & MASK64)


def derive_seed(seed: int, *keys: int) -> int:
    """Fold integer keys into a 64-bit seed; distinct key paths give independent streams."""
    s = seed & MASK64
    for k in keys:
        s = mix64(s, k & MASK64)
    return s


def uniform(seed: int, index: int) -> float:
    """A float in [0, 1) with 53 random bits."""
    return (mix64(seed, index) >> 11) * _INV53


def mix64_np(seeds: np.ndarray, indices: np.ndarray) -> np.ndarray:
    """Vectorized ``mix64``; ``seeds`` and ``indices`` broadcast against each other."""
    s = np.asarray(seeds, dtype=np.uint64)
    i = np.asarray(indices, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = s + (i + np.uint64(1)) * np.uint64(GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def uniform_np(seeds: np.ndarray, indices: np.ndarray) -> np.ndarray:
    return (mix64_np(seeds, indices) >> np.uint64(11)).astype(np.float64) * _INV53
