"""Deterministic random streams with a frozen bit-level contract.

Scores must reproduce bit-for-bit across machines and library versions, so
nothing here delegates to numpy's Generator machinery. The generator is
SplitMix64 used in counter mode (output i is a pure function of seed and i),
with Box-Muller on top for normal deviates. The stream layout is versioned:
any change to it must bump STREAM_NAME.
"""

from __future__ import annotations

import numpy as np

STREAM_NAME = "splitmix64-boxmuller/v1"

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3

_TWO53 = float(1 << 53)


def raw_words(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """Words offset+1 .. offset+count of the SplitMix64 stream for `seed`, as uint64."""
    idx = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed & _MASK64) + idx * np.uint64(_GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        return z ^ (z >> np.uint64(31))


def derive_seed(seed: int, label: str) -> int:
    """A child seed for an independent sub-stream, stable in (seed, label)."""
    h = _FNV_OFFSET
    for byte in label.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return int(raw_words(seed ^ h, 1)[0])


class Stream:
    """Stateful cursor over one SplitMix64 sub-stream."""

    def __init__(self, seed: int):
        self.seed = seed & _MASK64
        self._cursor = 0

    def _words(self, count: int) -> np.ndarray:
        out = raw_words(self.seed, count, offset=self._cursor)
        self._cursor += count
        return out

    def uniforms(self, count: int) -> np.ndarray:
        """`count` doubles in [0, 1), 53-bit resolution."""
        return np.asarray(self._words(count) >> np.uint64(11), dtype=np.float64) / _TWO53

    def normals(self, count: int) -> np.ndarray:
        """`count` standard-normal doubles via Box-Muller."""
        pairs = (count + 1) // 2
        words = self._words(2 * pairs)
        # u1 in (0, 1] keeps log finite; u2 in [0, 1)
        u1 = (np.asarray(words[:pairs] >> np.uint64(11), dtype=np.float64) + 1.0) / _TWO53
        u2 = np.asarray(words[pairs:] >> np.uint64(11), dtype=np.float64) / _TWO53
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * np.pi * u2
        out = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])
        return out[:count]

    def integers(self, count: int, low: int, high: int) -> np.ndarray:
        """`count` ints uniform over [low, high). Modulo-free; bias < 2**-40 for desk-scale ranges."""
        if high <= low:
            raise ValueError("empty integer range")
        span = high - low
        return low + np.floor(self.uniforms(count) * span).astype(np.int64).clip(0, span - 1)

    def permutation(self, count: int) -> np.ndarray:
        """A permutation of range(count), by sorting one block of uniforms."""
        return np.argsort(self.uniforms(count), kind="stable")
