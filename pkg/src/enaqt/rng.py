"""Counter-based random streams for reproducible parallel trajectories.

Every trajectory owns an independent stream keyed by (seed, trajectory
index); the n-th draw of a stream depends only on (seed, index, n).  This
makes trajectory outcomes independent of execution order, batching and
thread count.  The generator is the splitmix64 finalizer applied to a
per-stream key plus a Weyl-sequence counter, evaluated vectorized on
uint64 arrays.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _finalize(z: np.ndarray) -> np.ndarray:
    # unsigned wraparound is the intended modular arithmetic
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def stream_key(seed: int, index) -> np.ndarray:
    """64-bit key of stream ``index`` under master ``seed`` (vectorized)."""
    # 0-d arrays rather than numpy scalars: unsigned wraparound is the
    # intended semantics and stays silent in array arithmetic
    seed64 = np.asarray(seed & 0xFFFFFFFFFFFFFFFF, dtype=np.uint64)
    idx = np.asarray(index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        mixed = _finalize(seed64 + _GOLDEN) ^ (idx * _MIX1 + _GOLDEN)
    return _finalize(mixed)


def uniform(key, counter) -> np.ndarray:
    """Uniform [0, 1) draws: element i is draw ``counter[i]`` of stream
    ``key[i]``.  Broadcasts key against counter."""
    key = np.asarray(key, dtype=np.uint64)
    counter = np.asarray(counter, dtype=np.uint64)
    with np.errstate(over="ignore"):
        bits = _finalize(key + (counter + np.uint64(1)) * _GOLDEN)
    return (bits >> np.uint64(11)).astype(np.float64) * (2.0**-53)


class CounterStream:
    """Stateful view of one stream; draws advance an internal counter."""

    def __init__(self, seed: int, index: int):
        self.key = stream_key(seed, index)
        self.counter = 0

    def next(self) -> float:
        u = uniform(self.key, self.counter)
        self.counter += 1
        return float(u)

    def next_block(self, n: int) -> np.ndarray:
        u = uniform(self.key, np.arange(self.counter, self.counter + n))
        self.counter += n
        return u
