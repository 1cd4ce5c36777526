"""Deterministic named-stream random number generation.

Terrain, mob dynamics, dataset sampling, and the scripted expert each draw
from their own stream so that no two consumers ever share a sequence. A
stream is counter-based: its state is (key, counter), the counter being the
number of values drawn so far. That makes stream positions trivially
snapshottable, which the environment relies on for exact replay.

The generator is the splitmix64 finalizer applied to key + counter * gamma.
The numba kernel in _kernel.py implements the identical function; the two
are cross-checked by tests and must never diverge.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15

# Stream labels used across the toolkit. Anything outside this set is a bug.
STREAM_LABELS = ("terrain", "mobs", "episode", "relabel", "paraphrase", "expert")


@dataclass(frozen=True)
class Seed:
    """A base seed paired with a named sub-stream label."""

    base: int
    stream: str = "episode"

    def __post_init__(self):
        if self.stream not in STREAM_LABELS:
            raise ValueError(f"unknown stream label: {self.stream!r}")

    def key(self, salt: int = 0) -> int:
        return stream_key(self.base, self.stream, salt)


def stream_key(base_seed: int, label: str, salt: int = 0) -> int:
    """64-bit stream key derived from (base_seed, label, salt).

    SHA-256 based so keys are stable across platforms and Python versions.
    """
    raw = f"{base_seed & MASK64}:{label}:{salt}".encode()
    return int.from_bytes(hashlib.sha256(raw).digest()[:8], "little")


def mix64(z: int) -> int:
    """splitmix64 output function over a 64-bit state."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def draw_at(key: int, counter: int) -> int:
    """Value of the stream `key` at position `counter`."""
    return mix64((key + counter * _GAMMA) & MASK64)


class Stream:
    """Sequential view over a counter-based stream.

    Cheap to fork: Stream(key, counter) resumes exactly where a previous
    holder left off.
    """

    __slots__ = ("key", "counter")

    def __init__(self, key: int, counter: int = 0):
        self.key = key & MASK64
        self.counter = counter

    @classmethod
    def from_seed(cls, base_seed: int, label: str, salt: int = 0) -> "Stream":
        return cls(stream_key(base_seed, label, salt))

    def next_u64(self) -> int:
        v = draw_at(self.key, self.counter)
        self.counter += 1
        return v

    def random(self) -> float:
        """Float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def randint(self, lo: int, hi: int) -> int:
        """Integer in [lo, hi]. Modulo reduction; bias is negligible for
        the small ranges used here (hi - lo << 2**64)."""
        if hi < lo:
            raise ValueError("empty range")
        return lo + self.next_u64() % (hi - lo + 1)

    def choice(self, seq):
        if not seq:
            raise ValueError("empty sequence")
        return seq[self.next_u64() % len(seq)]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_u64() % (i + 1)
            items[i], items[j] = items[j], items[i]

    def fork(self) -> "Stream":
        return Stream(self.key, self.counter)

    def __repr__(self):
        return f"Stream(key={self.key:#018x}, counter={self.counter})"
