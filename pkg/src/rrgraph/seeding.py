"""Deterministic 64-bit seed mixing.

Every random decision in the package is a pure function of a 64-bit seed.
Edge presence is decided by hashing the canonical edge identifier together
with the sample seed, so the explicit sampler (numpy, all slots at once) and
the lazy explorer (pure Python, edge by edge) realise the same graph.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

_GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_UNIT = 2.0**-53


def mix64(x: int) -> int:
    """SplitMix64 finalizer on a Python integer."""
    z = x & MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def mix64_array(x: np.ndarray) -> np.ndarray:
    """``mix64`` applied elementwise to a ``uint64`` array (wrapping arithmetic)."""
    z = x.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(_M1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_M2)
    z ^= z >> np.uint64(31)
    return z


def derive_seed(master: int, *indices: int) -> int:
    h = mix64(master + _GOLDEN)
    for index in indices:
        h = mix64((h ^ (index & MASK64)) + _GOLDEN)
    return h


def _seed_key(seed: int) -> int:
    return mix64((seed & MASK64) ^ _GOLDEN)


def edge_uniform(seed: int, lo: int, hi: int) -> float:
    """Uniform in [0, 1) shared by every sampler for the edge ``(lo, hi)``."""
    h = mix64((mix64(_seed_key(seed) ^ lo) + hi) & MASK64)
    return (h >> 11) * _UNIT


def edge_uniform_array(seed: int, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    key = np.uint64(_seed_key(seed))
    h = mix64_array(np.bitwise_xor(lo.astype(np.uint64), key))
    h += hi.astype(np.uint64)
    h = mix64_array(h)
    return (h >> np.uint64(11)).astype(np.float64) * _UNIT


def numpy_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed & MASK64)


def fresh_seed() -> int:
    """A new master seed from OS entropy, recorded in the run manifest by callers."""
    return int(np.random.SeedSequence().generate_state(1, dtype=np.uint64)[0])
