"""Classical post-processing stages: error estimation, advantage
distillation, Cascade reconciliation, and Toeplitz privacy amplification.

Every stage takes the public channel it talks over and returns a StageLedger
so leakage accounting can be cross-checked against the channel's tap logs.
Shared public coins (sampling positions, shuffles, the hash seed) come from
seeded generators both parties hold; they carry no key information and are
not channel traffic, so tap bit counts stay equal to leaked key-dependent
bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import ClassicalChannel
from .rng import RandomSource

_BYTE = (bytes([0]), bytes([1]))


class InsufficientSecrecyMargin(RuntimeError):
    """Privacy amplification would produce a non-positive key length."""


@dataclass
class StageLedger:
    """Accounting record one pipeline stage hands to the next."""

    stage: str
    input_length: int
    output_length: int
    leaked: int = 0
    discarded: int = 0
    estimated_error: float | None = None
    eve_knowledge_bound: int = 0

    def __post_init__(self):
        if min(self.input_length, self.output_length, self.leaked,
               self.discarded, self.eve_knowledge_bound) < 0:
            raise ValueError("ledger counts must be non-negative")
        if self.output_length > self.input_length:
            raise ValueError("stage cannot emit more bits than it was given")
        if self.output_length + self.discarded != self.input_length:
            raise ValueError("output + discarded must equal input")

    def as_dict(self) -> dict:
        return {
            "stage": self.stage,
            "input_length": self.input_length,
            "output_length": self.output_length,
            "leaked": self.leaked,
            "discarded": self.discarded,
            "estimated_error": self.estimated_error,
            "eve_knowledge_bound": self.eve_knowledge_bound,
        }


def estimate_error(alice: np.ndarray, bob: np.ndarray, cch: ClassicalChannel,
                   position_rng: np.random.Generator,
                   fraction: float = 0.1) -> tuple[np.ndarray, np.ndarray, float, StageLedger]:
    """Estimate the pairwise disagreement by disclosing a random sample.

    Positions come from a shared public generator; both parties announce
    their sample values, so the estimate is common knowledge. Disclosed
    positions are discarded from both strings.
    """
    n = len(alice)
    if n != len(bob):
        raise ValueError("strings must have equal length")
    if not 0 < fraction < 1:
        raise ValueError("fraction must be in (0, 1)")
    k = max(1, int(n * fraction))
    positions = np.sort(position_rng.choice(n, size=k, replace=False))
    a_sample = alice[positions].astype(np.uint8)
    b_sample = bob[positions].astype(np.uint8)
    cch.send(a_sample.tobytes(), sender="alice")
    cch.send(b_sample.tobytes(), sender="bob")
    est = float(np.mean(a_sample != b_sample))
    keep = np.ones(n, dtype=bool)
    keep[positions] = False
    ledger = StageLedger(
        stage="estimate",
        input_length=n,
        output_length=n - k,
        leaked=2 * k,
        discarded=k,
        estimated_error=est,
    )
    return alice[keep], bob[keep], est, ledger


def block_error(delta: float, n_block: int) -> float:
    """Accepted-bit disagreement of the repetition-code protocol.

    A block is accepted when its positions carry either no errors or all
    errors; only the all-errors case leaves a wrong bit.
    """
    if n_block < 1:
        raise ValueError("block size must be >= 1")
    good = (1.0 - delta) ** n_block
    bad = delta ** n_block
    if good + bad == 0.0:
        return 0.0
    return bad / (good + bad)


def advantage_distill(alice: np.ndarray, bob: np.ndarray, n_block: int,
                      cch: ClassicalChannel, rng: RandomSource
                      ) -> tuple[np.ndarray, np.ndarray, np.ndarray, StageLedger]:
    """Repetition-code advantage distillation.

    Per block of n_block positions Alice draws a secret bit, announces the
    block XOR-masked with it, and Bob accepts the block only if his unmasked
    values all agree. Accepted blocks yield one bit each (Alice's secret,
    Bob's common value). Bob's accept flags are announced too, so leakage is
    n_block + 1 public bits per block, all visible in the channel taps.
    """
    n = len(alice)
    if n != len(bob):
        raise ValueError("strings must have equal length")
    if n_block < 1:
        raise ValueError("block size must be >= 1")
    blocks = n // n_block
    if blocks == 0:
        empty = np.zeros(0, dtype=np.uint8)
        ledger = StageLedger("distill", n, 0, leaked=0, discarded=n)
        return empty, empty, np.zeros(0, dtype=bool), ledger

    used = blocks * n_block
    a_blk = alice[:used].reshape(blocks, n_block).astype(np.uint8)
    b_blk = bob[:used].reshape(blocks, n_block).astype(np.uint8)
    secrets = rng.bits(blocks)
    masks = a_blk ^ secrets[:, None]
    for j in range(blocks):
        cch.send(masks[j].tobytes(), sender="alice")
    unmasked = b_blk ^ masks
    accept = np.all(unmasked == unmasked[:, :1], axis=1)
    cch.send(accept.astype(np.uint8).tobytes(), sender="bob")

    alice_out = secrets[accept]
    bob_out = unmasked[accept, 0]
    out = len(alice_out)
    ledger = StageLedger(
        stage="distill",
        input_length=n,
        output_length=out,
        leaked=blocks * n_block + blocks,
        discarded=n - out,
    )
    return alice_out, bob_out, accept, ledger


def initial_block_size(delta_hat: float, length: int) -> int:
    """Cascade's first-pass block size, clamped to the string length."""
    if delta_hat <= 0:
        return max(1, length)
    return max(1, min(math.ceil(0.73 / delta_hat), max(1, length)))


def cascade_reconcile(alice: np.ndarray, bob: np.ndarray, k1: int, passes: int,
                      cch: ClassicalChannel, perm_rng: np.random.Generator
                      ) -> tuple[np.ndarray, StageLedger]:
    """Cascade: parity exchange with binary search and back-propagation.

    Each pass shuffles with a shared public permutation, doubles the block
    size, and compares per-block parities. Alice's parities go over the
    public channel one bit at a time; each mismatch triggers a binary search
    (one disclosed parity per halving) that flips exactly one of Bob's bits.
    A flip re-odds the blocks containing that position in earlier passes,
    which are then searched again. The ledger's leaked count is exactly the
    number of parity bits Alice put on the channel.
    """
    n = len(alice)
    if n != len(bob):
        raise ValueError("strings must have equal length")
    if k1 < 1 or passes < 1:
        raise ValueError("k1 and passes must be >= 1")

    alice = alice.astype(np.uint8)
    bob = bob.astype(np.uint8).copy()
    leaked = 0

    def announce(parity: int) -> None:
        nonlocal leaked
        cch.send(_BYTE[parity], sender="alice")
        leaked += 1

    # per pass: index arrays per block and position -> block lookup
    pass_blocks: list[list[np.ndarray]] = []
    pass_block_of: list[np.ndarray] = []
    odd: list[set[int]] = []

    def search(p: int, j: int) -> None:
        """Binary-search one odd block; flips a bit and toggles all passes."""
        idx = pass_blocks[p][j]
        lo, hi = 0, len(idx)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            half = idx[lo:mid]
            pa = int(alice[half].sum() & 1)
            announce(pa)
            pb = int(bob[half].sum() & 1)
            if pa != pb:
                hi = mid
            else:
                lo = mid
        pos = int(idx[lo])
        bob[pos] ^= 1
        for q in range(len(pass_blocks)):
            jq = int(pass_block_of[q][pos])
            if jq in odd[q]:
                odd[q].discard(jq)
            else:
                odd[q].add(jq)

    for p in range(passes):
        k = min(k1 * (2 ** p), n)
        perm = perm_rng.permutation(n)
        starts = range(0, n, k)
        blocks = [perm[s:s + k] for s in starts]
        block_of = np.empty(n, dtype=np.int64)
        for j, idx in enumerate(blocks):
            block_of[idx] = j
        pass_blocks.append(blocks)
        pass_block_of.append(block_of)
        odd.append(set())

        for j, idx in enumerate(blocks):
            pa = int(alice[idx].sum() & 1)
            announce(pa)
            pb = int(bob[idx].sum() & 1)
            if pa != pb:
                odd[p].add(j)

        while True:
            target = None
            for q in range(len(pass_blocks)):
                if odd[q]:
                    target = (q, min(odd[q]))
                    break
            if target is None:
                break
            search(*target)

    residual = float(np.mean(alice != bob)) if n else 0.0
    ledger = StageLedger(
        stage="cascade",
        input_length=n,
        output_length=n,
        leaked=leaked,
        discarded=0,
        estimated_error=residual,
    )
    return bob, ledger


def toeplitz_hash(seed: np.ndarray, key: np.ndarray, r: int) -> np.ndarray:
    """Apply the Toeplitz map defined by seed (length len(key)+r-1).

    Row i of the matrix is seed[n-1+i-j] over columns j, so the product is a
    slice of the full convolution of seed and key, reduced mod 2.
    """
    n = len(key)
    if len(seed) != n + r - 1:
        raise ValueError("seed must have length len(key) + r - 1")
    if r < 1:
        raise ValueError("output length must be >= 1")
    conv = np.convolve(seed.astype(np.int64), key.astype(np.int64))
    return (conv[n - 1:n - 1 + r] % 2).astype(np.uint8)


def privacy_amplify(key: np.ndarray, ledger: StageLedger, safety: int,
                    public_rng: RandomSource
                    ) -> tuple[np.ndarray, np.ndarray, StageLedger]:
    """Compress key through a publicly seeded Toeplitz hash.

    Output length r = n - leaked - eve_knowledge_bound - safety, where
    leaked and the bound are read from the incoming ledger. Returns the
    final key, the public hash seed (so any observer can apply the same
    map), and this stage's ledger.
    """
    if safety < 0:
        raise ValueError("safety margin must be >= 0")
    n = len(key)
    r = n - ledger.leaked - ledger.eve_knowledge_bound - safety
    if r <= 0:
        raise InsufficientSecrecyMargin(
            "insufficient secrecy margin: "
            f"{n} - {ledger.leaked} - {ledger.eve_knowledge_bound} - {safety} "
            f"= {r}"
        )
    seed = public_rng.bits(n + r - 1)
    final = toeplitz_hash(seed, key.astype(np.uint8), r)
    out_ledger = StageLedger(
        stage="privacy_amplification",
        input_length=n,
        output_length=r,
        leaked=0,
        discarded=n - r,
        eve_knowledge_bound=ledger.eve_knowledge_bound,
    )
    return final, seed, out_ledger
