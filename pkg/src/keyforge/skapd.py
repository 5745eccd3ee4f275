"""Satellite-source key agreement pipeline.

A satellite draws a random bit string, encodes each bit in a random basis,
and broadcasts a handful of identical photons per bit to every party. Each
party decodes its photon bundle by maximum likelihood into a noisy copy of
the source string. Alice and Bob then run the classical phases over a
public channel: sample-based error estimation, repetition-code advantage
distillation, Cascade reconciliation, and Toeplitz privacy amplification.
The eavesdropper keeps her own (worse) copy plus everything public.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import BroadcastChannel, ClassicalChannel, PulseRecord
from .model import BASES, Polarization, Transcript, bits_to_hex, state_of
from .postprocess import (
    InsufficientSecrecyMargin,
    StageLedger,
    advantage_distill,
    block_error,
    cascade_reconcile,
    estimate_error,
    initial_block_size,
    privacy_amplify,
    toeplitz_hash,
)
from .rng import RandomSource, generator


@dataclass
class SatelliteString:
    """The source string and the states actually broadcast for it."""

    bits: np.ndarray
    states: list[Polarization]

    def __post_init__(self):
        assert len(self.states) == len(self.bits)


@dataclass
class NoisyCopy:
    party: str
    bits: np.ndarray
    error_rate: float


@dataclass
class SkapdOutcome:
    s0: SatelliteString
    copies: dict[str, NoisyCopy]
    alice_final: np.ndarray
    bob_final: np.ndarray
    eve_final: np.ndarray
    ledgers: list[StageLedger]
    transcript: Transcript
    raw_pair_error: float
    estimated_error: float
    accept_fraction: float
    residual_error: float
    leaked_total: int
    final_length: int
    aborted: bool
    abort_reason: str | None = None
    snapshots: dict[str, str] = field(default_factory=dict)


def satellite_broadcast(length: int, profile: dict[str, int],
                        satellite_rng: RandomSource
                        ) -> tuple[SatelliteString, dict[str, list[list[PulseRecord]]]]:
    """Draw the source string and emit per-party photon bundles for each bit."""
    if length <= 0:
        raise ValueError("length must be positive")
    bits = satellite_rng.bits(length)
    bases = satellite_rng.bits(length)
    channel = BroadcastChannel(profile)
    states: list[Polarization] = []
    bundles: dict[str, list[list[PulseRecord]]] = {p: [] for p in profile}
    for i in range(length):
        state = state_of(int(bits[i]), BASES[bases[i]])
        states.append(state)
        emitted = channel.broadcast(state, i)
        for party, pulses in emitted.items():
            bundles[party].append(pulses)
    return SatelliteString(bits, states), bundles


def ml_decode(bundle: list[PulseRecord], rng: RandomSource) -> int:
    """Decode one bit from a bundle of identical-state photons.

    Measures each photon in an independently uniform basis, then picks the
    candidate state of maximal likelihood. A candidate is ruled out by any
    same-basis observation with the other outcome; among the survivors the
    likelihood is (1/2)^(photons measured in the other basis), so the best
    candidates minimize the count of other-basis measurements. Ties between
    bit values fall to a fair coin. An empty bundle is a uniform guess.
    """
    if not bundle:
        return rng.bit()
    counts = [0, 0]
    seen: list[set[int]] = [set(), set()]
    for pulse in bundle:
        b = rng.bit()
        outcome, _ = pulse.measure(BASES[b], rng)
        counts[b] += 1
        seen[b].add(outcome)

    best_bits: set[int] = set()
    best_mismatch: int | None = None
    for b in (0, 1):
        if len(seen[b]) > 1:
            continue
        mismatch = counts[1 - b]
        bits = seen[b] if seen[b] else {0, 1}
        if best_mismatch is None or mismatch < best_mismatch:
            best_mismatch = mismatch
            best_bits = set(bits)
        elif mismatch == best_mismatch:
            best_bits |= bits
    if len(best_bits) == 1:
        return next(iter(best_bits))
    return rng.bit()


def decode_copy(party: str, bundles: list[list[PulseRecord]],
                rng: RandomSource, s0: SatelliteString) -> NoisyCopy:
    decoded = np.empty(len(bundles), dtype=np.uint8)
    for i, bundle in enumerate(bundles):
        decoded[i] = ml_decode(bundle, rng)
    err = float(np.mean(decoded != s0.bits))
    return NoisyCopy(party, decoded, err)


def eve_distilled_guess(masks: np.ndarray, accept: np.ndarray,
                        eve_blocks: np.ndarray, rng: RandomSource) -> np.ndarray:
    """Eve's majority-vote guess for each accepted distillation block.

    Unmasking her copy with the public mask gives per-position votes for
    Alice's secret bit; ties fall to her own coin.
    """
    votes = eve_blocks ^ masks
    guesses = np.empty(int(accept.sum()), dtype=np.uint8)
    j = 0
    n_block = votes.shape[1]
    for i in range(votes.shape[0]):
        if not accept[i]:
            continue
        ones = int(votes[i].sum())
        if 2 * ones > n_block:
            guesses[j] = 1
        elif 2 * ones < n_block:
            guesses[j] = 0
        else:
            guesses[j] = rng.bit()
        j += 1
    return guesses


def run_skapd(length: int, n_alice: int, n_bob: int, n_eve: int,
              n_block: int, passes: int, safety: int, eve_bound: int,
              master_seed: int, sample_fraction: float = 0.1,
              collect_snapshots: bool = False) -> SkapdOutcome:
    """Run the full pipeline and return keys, ledgers, and Eve's view."""
    profile = {"alice": n_alice, "bob": n_bob, "eve": n_eve}
    satellite = RandomSource(master_seed, "satellite")
    party_rng = {p: RandomSource(master_seed, p) for p in profile}

    s0, bundles = satellite_broadcast(length, profile, satellite)
    copies = {p: decode_copy(p, bundles[p], party_rng[p], s0) for p in profile}
    alice_raw = copies["alice"].bits
    bob_raw = copies["bob"].bits
    raw_pair_error = float(np.mean(alice_raw != bob_raw))

    transcript = Transcript()
    public = ClassicalChannel("public", transcript)
    taps = {p: public.add_output(p) for p in profile}

    snapshots: dict[str, str] = {}

    def snap(stage: str, a: np.ndarray, b: np.ndarray) -> None:
        if collect_snapshots:
            snapshots[f"{stage}.alice"] = bits_to_hex(a)
            snapshots[f"{stage}.bob"] = bits_to_hex(b)

    snap("decoded", alice_raw, bob_raw)

    # phase 1: sacrificial error estimate over public sample positions
    position_rng = generator(master_seed, "public/estimate")
    a_rest, b_rest, est, est_ledger = estimate_error(
        alice_raw, bob_raw, public, position_rng, sample_fraction)
    snap("estimated", a_rest, b_rest)

    # Eve discards the same (public) positions from her copy
    keep = np.ones(length, dtype=bool)
    keep_positions = np.sort(
        generator(master_seed, "public/estimate").choice(
            length, size=max(1, int(length * sample_fraction)), replace=False))
    keep[keep_positions] = False
    eve_rest = copies["eve"].bits[keep]

    # phase 2: advantage distillation
    a_dist, b_dist, accept, dist_ledger = advantage_distill(
        a_rest, b_rest, n_block, public, party_rng["alice"])
    snap("distilled", a_dist, b_dist)
    accept_fraction = float(np.mean(accept)) if len(accept) else 0.0

    # Eve parses the public masks and accept flags from the transcript
    blocks = len(accept)
    entries = transcript.for_channel("public")
    mask_payloads = entries[2:2 + blocks]
    masks = np.stack([np.frombuffer(p, dtype=np.uint8)
                      for _, _, p in mask_payloads]) if blocks else \
        np.zeros((0, n_block), dtype=np.uint8)
    used = blocks * n_block
    eve_blocks = eve_rest[:used].reshape(blocks, n_block)
    eve_dist = eve_distilled_guess(masks, accept, eve_blocks, party_rng["eve"])

    # phase 3: Cascade, block size from the estimate pushed through the
    # distillation error formula
    delta_hat = block_error(est, n_block)
    k1 = initial_block_size(delta_hat, len(a_dist))
    perm_rng = generator(master_seed, "public/cascade")
    b_corr, casc_ledger = cascade_reconcile(
        a_dist, b_dist, k1, passes, public, perm_rng)
    snap("reconciled", a_dist, b_corr)
    residual = casc_ledger.estimated_error or 0.0

    ledgers = [est_ledger, dist_ledger, casc_ledger]
    leaked_total = sum(l.leaked for l in ledgers)

    # phase 4: privacy amplification; leak subtraction covers the cascade
    # parities of the very string being hashed, the configured bound covers
    # Eve's photon-level knowledge
    pa_in = StageLedger(
        stage="pa_input",
        input_length=len(a_dist),
        output_length=len(a_dist),
        leaked=casc_ledger.leaked,
        eve_knowledge_bound=eve_bound,
    )
    public_pa = RandomSource(master_seed, "public/pa")
    empty = np.zeros(0, dtype=np.uint8)
    try:
        alice_final, seed, pa_ledger = privacy_amplify(
            a_dist, pa_in, safety, public_pa)
        bob_final = toeplitz_hash(seed, b_corr, len(alice_final))
        eve_final = toeplitz_hash(seed, eve_dist, len(alice_final)) \
            if len(eve_dist) == len(a_dist) else empty
        ledgers.append(pa_ledger)
        aborted = False
        reason = None
        snap("final", alice_final, bob_final)
    except InsufficientSecrecyMargin as exc:
        alice_final = bob_final = eve_final = empty
        aborted = True
        reason = str(exc)

    return SkapdOutcome(
        s0=s0,
        copies=copies,
        alice_final=alice_final,
        bob_final=bob_final,
        eve_final=eve_final,
        ledgers=ledgers,
        transcript=transcript,
        raw_pair_error=raw_pair_error,
        estimated_error=est,
        accept_fraction=accept_fraction,
        residual_error=residual,
        leaked_total=leaked_total,
        final_length=len(alice_final),
        aborted=aborted,
        abort_reason=reason,
        snapshots=snapshots,
    )
