"""Bits, bases, polarization states, and the public transcript.

The simulator's quantum alphabet is the four polarization states H, V, D, A
(0, 90, 45, 135 degrees). H and V live in the rectilinear basis, D and A in
the diagonal one. The bit encoding is pinned to H=0, V=1, D=0, A=1; any
consistent convention works, this one is fixed for reproducibility.

Bit strings are numpy uint8 arrays of 0/1 values; payloads that travel on
classical channels are immutable `bytes` whose bytes are 0/1 values.
"""

from __future__ import annotations

from enum import Enum

import numpy as np


class Basis(Enum):
    RECTILINEAR = 0
    DIAGONAL = 1


class Polarization(Enum):
    H = 0
    V = 1
    D = 2
    A = 3


BASES = (Basis.RECTILINEAR, Basis.DIAGONAL)

_BIT_OF = {
    Polarization.H: 0,
    Polarization.V: 1,
    Polarization.D: 0,
    Polarization.A: 1,
}

_BASIS_OF = {
    Polarization.H: Basis.RECTILINEAR,
    Polarization.V: Basis.RECTILINEAR,
    Polarization.D: Basis.DIAGONAL,
    Polarization.A: Basis.DIAGONAL,
}

_STATE_OF = {
    (0, Basis.RECTILINEAR): Polarization.H,
    (1, Basis.RECTILINEAR): Polarization.V,
    (0, Basis.DIAGONAL): Polarization.D,
    (1, Basis.DIAGONAL): Polarization.A,
}


def bit_of(state: Polarization) -> int:
    """Bit encoded by a polarization state (H,D -> 0; V,A -> 1)."""
    return _BIT_OF[state]


def basis_of(state: Polarization) -> Basis:
    """Basis a polarization state belongs to."""
    return _BASIS_OF[state]


def state_of(bit: int, basis: Basis) -> Polarization:
    """Polarization state encoding `bit` in `basis`; inverse of bit_of."""
    return _STATE_OF[(bit, basis)]


def bits_to_hex(bits: np.ndarray) -> str:
    """Compact 'length:hex' encoding of a bit string (MSB-first packing)."""
    arr = np.asarray(bits, dtype=np.uint8)
    return f"{arr.size}:{np.packbits(arr).tobytes().hex()}"


def hex_to_bits(text: str) -> np.ndarray:
    n, _, hexpart = text.partition(":")
    n = int(n)
    packed = np.frombuffer(bytes.fromhex(hexpart), dtype=np.uint8)
    return np.unpackbits(packed)[:n].copy()


class TranscriptError(ValueError):
    """Raised when an append would violate transcript ordering."""


class Transcript:
    """Append-only record of every payload sent on any classical channel.

    Entries are (round_index, sender, channel, payload) tuples, ordered by
    round index and then insertion order; round indices must be
    non-decreasing.
    """

    __slots__ = ("entries", "_last_round")

    def __init__(self):
        self.entries: list[tuple[int, str, str, bytes]] = []
        self._last_round = -1

    def record(self, round_index: int, sender: str, channel: str, payload: bytes):
        if round_index < self._last_round:
            raise TranscriptError(
                f"round {round_index} after round {self._last_round}"
            )
        self._last_round = round_index
        self.entries.append((round_index, sender, channel, payload))

    @property
    def last_round(self) -> int:
        return self._last_round

    def for_channel(self, channel: str) -> list[tuple[int, str, bytes]]:
        return [(r, s, p) for r, s, c, p in self.entries if c == channel]

    def bit_count(self, channel: str | None = None) -> int:
        """Total payload bits recorded, optionally for one channel."""
        return sum(
            len(p) for _, _, c, p in self.entries if channel is None or c == channel
        )

    def __len__(self) -> int:
        return len(self.entries)
