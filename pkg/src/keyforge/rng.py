"""Deterministic, labeled randomness for reproducible protocol runs.

Every consumer of randomness (each party, the channel, the satellite, the
shared public coins) owns its own sub-stream, derived from one 64-bit master
seed plus a label string. The derivation is fixed and platform independent:

    key = SHA-256("{master_seed}:{label}")[:16]   (two little-endian uint64s)

and the key feeds a Philox counter-based bit generator. Identical
(seed, label) pairs therefore produce identical bit streams everywhere,
while distinct labels give statistically independent streams. Labels in use:
"alice", "bob", "eve", "channel", "satellite", "public/<purpose>", and
"trial:<i>" prefixes for per-trial derivation.
"""

from __future__ import annotations

import hashlib

import numpy as np

_CHUNK = 8192

MASK64 = (1 << 64) - 1


def _digest(master_seed: int, label: str) -> bytes:
    return hashlib.sha256(f"{master_seed & MASK64}:{label}".encode()).digest()


def philox_key(master_seed: int, label: str) -> np.ndarray:
    """Two-word Philox key for the (seed, label) sub-stream."""
    d = _digest(master_seed, label)
    lo = int.from_bytes(d[0:8], "little")
    hi = int.from_bytes(d[8:16], "little")
    return np.array([lo, hi], dtype=np.uint64)


def sub_seed(master_seed: int, label: str) -> int:
    """64-bit derived seed, used to give each trial its own master seed."""
    return int.from_bytes(_digest(master_seed, label)[0:8], "little")


def generator(master_seed: int, label: str) -> np.random.Generator:
    """Counter-based numpy Generator for utility randomness.

    Used for permutations and position sampling where a raw bit stream is
    awkward; same derivation scheme as RandomSource, so it is equally
    reproducible.
    """
    return np.random.Generator(np.random.Philox(key=philox_key(master_seed, label)))


class RandomSource:
    """Seeded, single-owner bit stream.

    The stream is defined as the concatenation of fixed-size blocks drawn
    from the underlying Philox generator, so the sequence of bits served is
    independent of how calls are sliced (bit() vs bits(n)). `position` counts
    bits handed out so far.
    """

    __slots__ = ("master_seed", "label", "_gen", "_buf", "_i", "_position")

    def __init__(self, master_seed: int, label: str):
        self.master_seed = master_seed & MASK64
        self.label = label
        self._gen = np.random.Generator(
            np.random.Philox(key=philox_key(master_seed, label))
        )
        self._buf = self._gen.integers(0, 2, size=_CHUNK, dtype=np.uint8)
        self._i = 0
        self._position = 0

    @property
    def position(self) -> int:
        return self._position

    def _refill(self) -> None:
        self._buf = self._gen.integers(0, 2, size=_CHUNK, dtype=np.uint8)
        self._i = 0

    def bit(self) -> int:
        i = self._i
        if i >= _CHUNK:
            self._refill()
            i = 0
        self._i = i + 1
        self._position += 1
        return int(self._buf[i])

    def bits(self, n: int) -> np.ndarray:
        """Next n bits of the stream as a uint8 array."""
        if n < 0:
            raise ValueError("bit count must be non-negative")
        if n == 0:
            return np.empty(0, dtype=np.uint8)
        parts = []
        need = n
        while need > 0:
            if self._i >= _CHUNK:
                self._refill()
            take = min(need, _CHUNK - self._i)
            parts.append(self._buf[self._i : self._i + take])
            self._i += take
            need -= take
        self._position += n
        if len(parts) == 1:
            return parts[0].copy()
        return np.concatenate(parts)

    def spawn(self, sublabel: str) -> "RandomSource":
        """Independent child stream labeled '<label>/<sublabel>'."""
        return RandomSource(self.master_seed, f"{self.label}/{sublabel}")

    def __repr__(self) -> str:
        return (
            f"RandomSource(seed={self.master_seed}, label={self.label!r}, "
            f"position={self._position})"
        )
