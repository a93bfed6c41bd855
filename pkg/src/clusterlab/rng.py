"""Deterministic 64-bit random number generation.

Everything stochastic in this package draws from one primitive: the
splitmix64 stream.  Output k of a stream seeded with s is

    mix64(s + (k + 1) * GOLDEN)        (all arithmetic mod 2**64)

which makes the stream random-access, so bulk draws vectorize with
numpy uint64 arithmetic while scalar draws use plain Python ints.
Both paths produce bit-identical values on every platform.

Seed splitting for independent sub-streams (per-run seeds, per-restart
seeds) is ``split(master, i)`` = output i of the master stream.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidInput

_MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV_2_53 = 2.0 ** -53


def mix64(z: int) -> int:
    """splitmix64 finalizer: avalanche a 64-bit value."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def split(master_seed: int, index: int) -> int:
    """Child seed `index` of a master seed (output `index` of its stream)."""
    if index < 0:
        raise InvalidInput(f"split index must be >= 0, got {index}")
    return mix64((master_seed + (index + 1) * GOLDEN) & _MASK)


def _mix64_vec(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(_MIX1)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


class Rng:
    """Counter-based splitmix64 stream with scalar and vector draws."""

    def __init__(self, seed: int):
        self._seed = seed & _MASK
        self._count = 0

    def u64(self) -> int:
        """Next raw 64-bit output."""
        self._count += 1
        return mix64((self._seed + self._count * GOLDEN) & _MASK)

    def _u64_block(self, n: int) -> np.ndarray:
        ks = np.arange(self._count + 1, self._count + n + 1, dtype=np.uint64)
        self._count += n
        base = np.uint64(self._seed) + ks * np.uint64(GOLDEN)
        return _mix64_vec(base)

    def uniform(self) -> float:
        """One double in [0, 1)."""
        return (self.u64() >> 11) * _INV_2_53

    def uniforms(self, n: int) -> np.ndarray:
        """n doubles in [0, 1)."""
        return (self._u64_block(n) >> np.uint64(11)).astype(np.float64) * _INV_2_53

    def normals(self, n: int) -> np.ndarray:
        """n standard Gaussian deviates via Box-Muller."""
        pairs = (n + 1) // 2
        u = self._u64_block(2 * pairs)
        # u1 in (0, 1] so log() is finite; u2 in [0, 1)
        u1 = ((u[:pairs] >> np.uint64(11)).astype(np.float64) + 1.0) * _INV_2_53
        u2 = (u[pairs:] >> np.uint64(11)).astype(np.float64) * _INV_2_53
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * math.pi * u2
        out = np.empty(2 * pairs)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:n]

    def randint(self, n: int) -> int:
        """Unbiased integer in [0, n) via rejection sampling."""
        if n <= 0:
            raise InvalidInput(f"randint bound must be positive, got {n}")
        bound = _MASK + 1 - ((_MASK + 1) % n)
        while True:
            z = self.u64()
            if z < bound:
                return z % n

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates permutation of range(n)."""
        perm = np.arange(n)
        for i in range(n - 1, 0, -1):
            j = self.randint(i + 1)
            perm[i], perm[j] = perm[j], perm[i]
        return perm

    def choice_weighted(self, weights: np.ndarray) -> int:
        """Index drawn with probability proportional to nonnegative weights."""
        cumulative = np.cumsum(weights, dtype=np.float64)
        total = cumulative[-1]
        if not total > 0.0:
            raise InvalidInput("weights must have a positive sum")
        u = self.uniform() * total
        return int(np.searchsorted(cumulative, u, side="right").clip(0, len(weights) - 1))
