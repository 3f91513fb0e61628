"""Reproducible random streams for parallel Monte Carlo.

Every stochastic operation in this package draws from an ``RngSpec``, a
(master_seed, stream_id) pair that keys a counter-based Philox generator.
Distinct stream ids give statistically independent streams; the same pair
always reproduces the same bits, regardless of thread count or the order
in which trials are executed.

Derived streams are obtained with :meth:`RngSpec.substream`, which hashes
the child index into a fresh 64-bit stream id (splitmix64 finalizer).  The
convention used by the drivers in this package:

* trial ``i`` of a Monte Carlo run uses ``base.substream(i)``;
* a correlated pair splits its trial stream into ``substream(0)`` for the
  shared prefix and ``substream(1)`` / ``substream(2)`` for the two
  independent suffixes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One step of the splitmix64 output function (a strong 64-bit mixer)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def mix64(*parts: int) -> int:
    """Fold integers into a single well-mixed 64-bit word."""
    h = 0
    for p in parts:
        h = splitmix64(h ^ (p & _MASK64))
    return h


@dataclass(frozen=True)
class RngSpec:
    """Key of one reproducible random stream."""

    master_seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        """A fresh Philox generator keyed by (master_seed, stream_id)."""
        key = ((self.master_seed & _MASK64) << 64) | (self.stream_id & _MASK64)
        return np.random.Generator(np.random.Philox(key=key))

    def substream(self, *indices: int) -> "RngSpec":
        """Derive an independent child stream from one or more indices."""
        return RngSpec(self.master_seed, mix64(self.stream_id, *indices))
