"""The three channel kinds: classical, quantum, and broadcast.

A classical channel delivers a perfect copy of every payload to every
registered output, eavesdropper taps included. A quantum channel carries one
pulse at a time; the pulse's state can be read only by measuring it, and
measurement consumes it, so copying is not expressible in the interface.
A broadcast channel emits many identical pulses of one state per round, a
configurable number to each receiver.
"""

from __future__ import annotations

import numpy as np

from .model import Basis, Polarization, basis_of, bit_of, state_of, Transcript


class ProtocolViolation(RuntimeError):
    """An operation broke channel rules (double send, re-measurement)."""


class TapLog:
    """Append-only capture of payloads at one channel output."""

    __slots__ = ("label", "entries")

    def __init__(self, label: str):
        self.label = label
        self.entries: list[tuple[int, bytes]] = []

    def append(self, round_index: int, payload: bytes):
        self.entries.append((round_index, payload))

    def bit_count(self) -> int:
        return sum(len(p) for _, p in self.entries)

    def payloads(self) -> list[bytes]:
        return [p for _, p in self.entries]

    def by_round(self) -> dict[int, bytes]:
        """Latest payload per round index."""
        return {r: p for r, p in self.entries}

    def to_hex(self) -> list[str]:
        return [f"{r}:{np.packbits(np.frombuffer(p, dtype=np.uint8)).tobytes().hex()}"
                for r, p in self.entries]

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TapLog):
            return NotImplemented
        return self.entries == other.entries


class ClassicalChannel:
    """Ideal public channel: one input, any number of identical outputs.

    Sends are lossless and order preserving; every output log receives the
    same payload object. Round indices default to an internal monotone
    counter so bulk post-processing traffic needs no bookkeeping.
    """

    def __init__(self, name: str, transcript: Transcript | None = None):
        self.name = name
        self.transcript = transcript
        self.outputs: dict[str, TapLog] = {}
        self._round = -1

    def add_output(self, label: str) -> TapLog:
        if label in self.outputs:
            raise ValueError(f"output {label!r} already registered")
        log = TapLog(label)
        self.outputs[label] = log
        return log

    def send(self, payload: bytes, round_index: int | None = None,
             sender: str = "") -> int:
        """Deliver payload to every registered output; returns output count."""
        if len(payload) == 0:
            raise ValueError("payload must be non-empty")
        if round_index is None:
            round_index = self._round + 1
        if round_index < self._round:
            raise ProtocolViolation(
                f"round {round_index} precedes current round {self._round}"
            )
        self._round = round_index
        for log in self.outputs.values():
            log.append(round_index, payload)
        if self.transcript is not None:
            self.transcript.record(round_index, sender, self.name, payload)
        return len(self.outputs)

    def bits_sent(self) -> int:
        """Total payload bits that have transited the channel."""
        for log in self.outputs.values():
            return log.bit_count()
        return 0


class PulseRecord:
    """One polarized pulse in flight. The state is private to the object:
    the only way to learn anything about it is `measure`, which consumes it.
    """

    __slots__ = ("round_index", "_state")

    def __init__(self, state: Polarization, round_index: int = 0):
        self.round_index = round_index
        self._state = state

    @property
    def consumed(self) -> bool:
        return self._state is None

    def measure(self, basis: Basis, rng) -> tuple[int, Polarization]:
        """Measure in `basis`: (outcome bit, post-measurement state).

        Matched basis reads the encoded bit deterministically and leaves the
        state unchanged; a mismatched basis yields a uniform bit from `rng`
        and the state collapses onto the measurement basis. Either way the
        original state is gone afterwards.
        """
        state = self._state
        if state is None:
            raise ProtocolViolation("pulse already measured")
        self._state = None
        if basis_of(state) is basis:
            return bit_of(state), state
        outcome = rng.bit()
        return outcome, state_of(outcome, basis)


def measure_pulse(pulse: PulseRecord, basis: Basis, rng) -> tuple[int, Polarization]:
    return pulse.measure(basis, rng)


class QuantumChannel:
    """Single-pulse quantum link with an optional attached interceptor.

    The interceptor (an eavesdropping strategy) runs between send and
    delivery and may replace the in-flight pulse; it cannot copy it.
    """

    def __init__(self, interceptor=None):
        self.interceptor = interceptor
        self._in_flight: PulseRecord | None = None

    def send(self, state: Polarization, round_index: int) -> int:
        if self._in_flight is not None:
            raise ProtocolViolation(
                f"pulse for round {self._in_flight.round_index} still in flight"
            )
        pulse = PulseRecord(state, round_index)
        if self.interceptor is not None:
            pulse = self.interceptor.intercept(pulse)
        self._in_flight = pulse
        return round_index

    def deliver(self) -> PulseRecord:
        pulse = self._in_flight
        if pulse is None:
            raise ProtocolViolation("no pulse in flight")
        self._in_flight = None
        return pulse


class BroadcastChannel:
    """Weak-signal broadcast: every receiver gets n_i pulses of one state.

    All pulses emitted in a round carry the same state. The optional noise
    hook is applied per photon at emission and may substitute the state.
    """

    def __init__(self, photons_per_receiver: dict[str, int], noise=None,
                 noise_rng=None):
        for label, count in photons_per_receiver.items():
            if count < 0:
                raise ValueError(f"photon count for {label!r} must be >= 0")
        self.photons_per_receiver = dict(photons_per_receiver)
        self.noise = noise
        self.noise_rng = noise_rng

    def broadcast(self, state: Polarization,
                  round_index: int) -> dict[str, list[PulseRecord]]:
        bundles: dict[str, list[PulseRecord]] = {}
        for label, count in self.photons_per_receiver.items():
            if self.noise is None:
                bundles[label] = [PulseRecord(state, round_index)
                                  for _ in range(count)]
            else:
                bundles[label] = [
                    PulseRecord(self.noise(state, self.noise_rng), round_index)
                    for _ in range(count)
                ]
        return bundles
