"""Deterministic randomness.

Every random draw in a run comes from a named sub-stream of one root seed.
A stream is keyed BLAKE2b run in counter mode over (root seed, stream name),
so the draws seen by one link or party do not depend on the order in which
other streams are used, and they are stable across Python versions.
"""

from __future__ import annotations

import hashlib
from collections import deque
from typing import Iterable, Protocol

from .bits import BitString

_BLOCK_BITS = 512


class RandomSource(Protocol):
    def bits(self, length: int) -> BitString: ...

    def below(self, bound: int) -> int: ...


class Stream:
    """One independent pseudo-random stream (counter-mode keyed BLAKE2b)."""

    def __init__(self, seed: int, name: str) -> None:
        self.name = name
        self._key = hashlib.blake2b(f"{seed}/{name}".encode(), digest_size=32).digest()
        self._counter = 0
        self._pool = 0
        self._avail = 0

    def _refill(self) -> None:
        block = hashlib.blake2b(self._counter.to_bytes(8, "big"), key=self._key).digest()
        self._counter += 1
        self._pool = (self._pool << _BLOCK_BITS) | int.from_bytes(block, "big")
        self._avail += _BLOCK_BITS

    def bits(self, length: int) -> BitString:
        if length < 0:
            raise ValueError("negative length")
        while self._avail < length:
            self._refill()
        self._avail -= length
        value = self._pool >> self._avail
        self._pool &= (1 << self._avail) - 1
        return BitString(value, length)

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound), by rejection."""
        if bound < 1:
            raise ValueError("bound must be positive")
        width = (bound - 1).bit_length()
        while True:
            value = self.bits(width).value
            if value < bound:
                return value


class Rng:
    """Root generator handing out named sub-streams.

    Asking twice for the same name returns the same stream object, so a
    stream continues where it left off.
    """

    def __init__(self, seed: int) -> None:
        self.seed = seed
        self._streams: dict[str, Stream] = {}

    def stream(self, name: str) -> Stream:
        if name not in self._streams:
            self._streams[name] = Stream(self.seed, name)
        return self._streams[name]


class ScriptedRng:
    """Replays queued values; used to force specific draws in examples and tests.

    ``bits`` pops BitStrings (or bit literals), ``below`` pops ints. Once a
    queue is empty the optional ``fallback`` source is used.
    """

    def __init__(
        self,
        bits: Iterable[BitString | str] = (),
        ints: Iterable[int] = (),
        fallback: RandomSource | None = None,
    ) -> None:
        self._bits = deque(b if isinstance(b, BitString) else BitString.from_bits(b) for b in bits)
        self._ints = deque(ints)
        self._fallback = fallback

    def bits(self, length: int) -> BitString:
        if self._bits:
            value = self._bits.popleft()
            if value.length != length:
                raise ValueError(f"scripted {value.length}-bit value where {length} bits were drawn")
            return value
        if self._fallback is None:
            raise LookupError("scripted bit values exhausted")
        return self._fallback.bits(length)

    def below(self, bound: int) -> int:
        if self._ints:
            value = self._ints.popleft()
            if not 0 <= value < bound:
                raise ValueError(f"scripted value {value} outside [0, {bound})")
            return value
        if self._fallback is None:
            raise LookupError("scripted int values exhausted")
        return self._fallback.below(bound)
