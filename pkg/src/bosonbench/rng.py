"""Seeded, splittable random streams.

Every stochastic routine in the package takes an :class:`RngStream`.  A stream is
fully determined by ``(seed, stream_id)`` plus the path of :meth:`RngStream.spawn`
calls that produced it, so trial ``i`` of an experiment always sees the same
numbers regardless of how many trials run or in which order they are scheduled.

The bit generator is Philox (counter based); sub-streams are derived through
``numpy.random.SeedSequence`` spawn keys, which makes distinct keys independent
by construction.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


class RngStream:
    """A reproducible random stream identified by ``(seed, stream_id)``.

    Args:
        seed: 64-bit integer seed.
        stream_id: 64-bit stream identifier. Different ids give independent streams.
    """

    def __init__(self, seed: int = 0, stream_id: int = 0, _path: tuple[int, ...] = ()):
        if seed < 0 or stream_id < 0:
            raise ValueError("seed and stream_id must be non-negative")
        self.seed = int(seed) & _MASK64
        self.stream_id = int(stream_id) & _MASK64
        self._path = tuple(int(p) for p in _path)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *self._path))
        self.generator = np.random.Generator(np.random.Philox(ss))

    @property
    def key(self) -> tuple[int, ...]:
        return (self.seed, self.stream_id, *self._path)

    def spawn(self, index: int) -> "RngStream":
        """Child stream number ``index``; independent of the parent's state."""
        return RngStream(self.seed, self.stream_id, (*self._path, index))

    def spawn_many(self, count: int, start: int = 0) -> list["RngStream"]:
        return [self.spawn(start + i) for i in range(count)]

    # thin delegation for the draws used throughout the package
    def normal(self, loc=0.0, scale=1.0, size=None):
        return self.generator.normal(loc, scale, size)

    def random(self, size=None):
        return self.generator.random(size)

    def integers(self, low, high=None, size=None):
        return self.generator.integers(low, high, size)

    def permutation(self, x):
        return self.generator.permutation(x)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, path={self._path})"


def as_stream(rng: "RngStream | int | None") -> RngStream:
    """Coerce an int seed (or ``None`` meaning seed 0) into a stream."""
    if isinstance(rng, RngStream):
        return rng
    return RngStream(0 if rng is None else int(rng))
