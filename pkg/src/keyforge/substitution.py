"""Transport-substitution harness: swap the quantum link for something else.

Same round structure as the four-state protocol, but the state travels over
a pluggable transport. Two transports are provided:

* classical: the state is spelled out as (basis, bit) over an ideal public
  channel. The tap receives perfect copies, so an adversary reconstructs
  every sifted key bit from traffic alone.
* oracle: the state is handed to the receiver out of band, leaving no
  traffic. The adversary sees only sifting messages and can do no better
  than coin flips.

Running both makes the dependence concrete: remove the unclonable carrier
and the key shows up verbatim in the adversary's tap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import ClassicalChannel, TapLog
from .model import Transcript
from .rng import RandomSource

_BYTE = (bytes([0]), bytes([1]))
# payload for (basis, bit), indexed [basis][bit]; reused, payloads are immutable
_STATE_PAYLOAD = tuple(tuple(bytes([b, v]) for v in (0, 1)) for b in (0, 1))

TRANSPORTS = ("classical", "oracle")


@dataclass
class SubstitutionResult:
    rounds: int
    transport: str
    alice_key: np.ndarray
    bob_key: np.ndarray
    sifted_indices: np.ndarray
    qber: float
    sift_fraction: float
    eve_guesses: np.ndarray
    eve_accuracy: float
    transcript: Transcript
    t_tap_bits: int
    public_tap_bits: int

    @property
    def sifted_length(self) -> int:
        return len(self.alice_key)


def reconstruct_from_tap(tap: TapLog, sifted_indices: np.ndarray) -> np.ndarray:
    """Adversary's decoder for the classical transport.

    Works purely from captured traffic: payload byte 1 of round r is the
    transmitted bit, and sifting tells which rounds count.
    """
    by_round = tap.by_round()
    return np.array([by_round[int(r)][1] for r in sifted_indices], dtype=np.uint8)


def run_substitution(rounds: int, master_seed: int,
                     transport: str = "classical") -> SubstitutionResult:
    if rounds <= 0:
        raise ValueError("rounds must be positive")
    if transport not in TRANSPORTS:
        raise ValueError(f"unknown transport {transport!r}")

    alice = RandomSource(master_seed, "alice")
    bob = RandomSource(master_seed, "bob")
    eve = RandomSource(master_seed, "eve")

    transcript = Transcript()
    public = ClassicalChannel("public", transcript)
    public.add_output("bob")
    public_eve = public.add_output("eve")

    t_eve: TapLog | None = None
    t_chan: ClassicalChannel | None = None
    if transport == "classical":
        t_chan = ClassicalChannel("t", transcript)
        t_chan.add_output("bob")
        t_eve = t_chan.add_output("eve")

    alice_bits = alice.bits(rounds)
    alice_bases = alice.bits(rounds)
    bob_bases = bob.bits(rounds)

    bob_bits = np.empty(rounds, dtype=np.uint8)
    keep = np.empty(rounds, dtype=bool)

    for r in range(rounds):
        bit = int(alice_bits[r])
        basis = int(alice_bases[r])
        if t_chan is not None:
            t_chan.send(_STATE_PAYLOAD[basis][bit], round_index=r, sender="alice")
        # receiver side: matched basis reads the bit, mismatch is a coin flip
        bb = int(bob_bases[r])
        bob_bits[r] = bit if bb == basis else bob.bit()
        public.send(_BYTE[bb], round_index=r, sender="bob")
        matched = bb == basis
        keep[r] = matched
        public.send(_BYTE[1 if matched else 0], round_index=r, sender="alice")

    sifted_indices = np.nonzero(keep)[0]
    alice_key = alice_bits[sifted_indices].astype(np.uint8)
    bob_key = bob_bits[sifted_indices]
    sifted = len(sifted_indices)
    qber = float(np.mean(alice_key != bob_key)) if sifted else 0.0

    if transport == "classical":
        assert t_eve is not None
        eve_guesses = reconstruct_from_tap(t_eve, sifted_indices)
        t_tap_bits = t_eve.bit_count()
    else:
        eve_guesses = eve.bits(sifted)
        t_tap_bits = 0

    if sifted:
        accuracy = float(np.mean(eve_guesses == alice_key))
    else:
        accuracy = 0.0

    return SubstitutionResult(
        rounds=rounds,
        transport=transport,
        alice_key=alice_key,
        bob_key=bob_key,
        sifted_indices=sifted_indices,
        qber=qber,
        sift_fraction=sifted / rounds,
        eve_guesses=eve_guesses,
        eve_accuracy=accuracy,
        transcript=transcript,
        t_tap_bits=t_tap_bits,
        public_tap_bits=public_eve.bit_count(),
    )
