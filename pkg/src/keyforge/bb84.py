"""Four-state prepare-and-measure key agreement over a quantum channel.

Per round: the sender draws a bit and a basis, transmits the matching
polarization; the receiver measures in an independently drawn basis and
announces it; the sender replies keep or discard. Kept rounds (matching
bases) form the sifted keys. An optional intercept-resend adversary measures
each pulse in a random basis and forwards its post-measurement state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import ClassicalChannel, PulseRecord, QuantumChannel
from .model import BASES, Transcript, state_of
from .rng import RandomSource

_BYTE = (bytes([0]), bytes([1]))


class InterceptResend:
    """Measure every pulse in a uniformly random basis and resend the result.

    Keeps the measured bit and basis per round so the adversary can later
    guess the sifted key (her bit at each kept round).
    """

    def __init__(self, rng: RandomSource, rounds: int):
        self.rng = rng
        self.bases = np.empty(rounds, dtype=np.uint8)
        self.outcomes = np.empty(rounds, dtype=np.uint8)

    def intercept(self, pulse: PulseRecord) -> PulseRecord:
        r = pulse.round_index
        basis = BASES[self.rng.bit()]
        outcome, post_state = pulse.measure(basis, self.rng)
        self.bases[r] = basis.value
        self.outcomes[r] = outcome
        return PulseRecord(post_state, r)


@dataclass
class BB84Result:
    rounds: int
    alice_key: np.ndarray
    bob_key: np.ndarray
    sifted_indices: np.ndarray
    qber: float
    sift_fraction: float
    transcript: Transcript
    eve_outcomes: np.ndarray | None = None
    eve_guesses: np.ndarray | None = None
    eve_tap_bits: int = 0
    alice_bits: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]

    @property
    def sifted_length(self) -> int:
        return len(self.alice_key)


def run_bb84(rounds: int, master_seed: int, eve: str = "none") -> BB84Result:
    """Run `rounds` rounds end to end and sift.

    eve: "none" for a passive adversary (classical tap only) or "intercept"
    for intercept-resend on every pulse.
    """
    if rounds <= 0:
        raise ValueError("rounds must be positive")
    if eve not in ("none", "intercept"):
        raise ValueError(f"unknown adversary {eve!r}")

    alice = RandomSource(master_seed, "alice")
    bob = RandomSource(master_seed, "bob")

    interceptor = None
    if eve == "intercept":
        interceptor = InterceptResend(RandomSource(master_seed, "eve"), rounds)

    transcript = Transcript()
    public = ClassicalChannel("public", transcript)
    alice_log = public.add_output("alice")
    bob_log = public.add_output("bob")
    eve_log = public.add_output("eve")
    quantum = QuantumChannel(interceptor)

    alice_bits = alice.bits(rounds)
    alice_bases = alice.bits(rounds)
    bob_bases = bob.bits(rounds)

    bob_bits = np.empty(rounds, dtype=np.uint8)
    keep = np.empty(rounds, dtype=bool)

    for r in range(rounds):
        quantum.send(state_of(int(alice_bits[r]), BASES[alice_bases[r]]), r)
        pulse = quantum.deliver()
        outcome, _ = pulse.measure(BASES[bob_bases[r]], bob)
        bob_bits[r] = outcome
        b = bob_bases[r]
        public.send(_BYTE[b], round_index=r, sender="bob")
        matched = b == alice_bases[r]
        keep[r] = matched
        public.send(_BYTE[1 if matched else 0], round_index=r, sender="alice")

    sifted_indices = np.nonzero(keep)[0]
    alice_key = alice_bits[sifted_indices].astype(np.uint8)
    bob_key = bob_bits[sifted_indices]
    sifted = len(sifted_indices)
    qber = float(np.mean(alice_key != bob_key)) if sifted else 0.0

    result = BB84Result(
        rounds=rounds,
        alice_key=alice_key,
        bob_key=bob_key,
        sifted_indices=sifted_indices,
        qber=qber,
        sift_fraction=sifted / rounds,
        transcript=transcript,
        eve_tap_bits=eve_log.bit_count(),
        alice_bits=alice_bits,
    )
    if interceptor is not None:
        result.eve_outcomes = interceptor.outcomes
        result.eve_guesses = interceptor.outcomes[sifted_indices]
    # the two personal logs are unused here but assert the tap is a copy
    assert alice_log.entries == eve_log.entries == bob_log.entries
    return result


def eve_accuracy(result: BB84Result) -> float | None:
    """Fraction of sifted key bits the adversary's guesses get right.

    None for a passive adversary: with no quantum-side information her best
    strategy is a coin flip, and we report that at the session level instead
    of inventing guesses here.
    """
    if result.eve_guesses is None:
        return None
    if len(result.alice_key) == 0:
        return 0.0
    return float(np.mean(result.eve_guesses == result.alice_key))
