"""Acceptance suite: the package's statistical, accounting, and
reproducibility guarantees, one criterion per test. Every test prints (and
registers for the terminal summary) a single pass/fail line with the
measured numbers, and asserts both the tolerance and its runtime budget.
"""

from __future__ import annotations

import time
from fractions import Fraction

import numpy as np

import oracles
from conftest import ACCEPTANCE_LINES
from keyforge.bb84 import eve_accuracy, run_bb84
from keyforge.channels import ClassicalChannel
from keyforge.config import ExperimentConfig
from keyforge.postprocess import (
    InsufficientSecrecyMargin,
    StageLedger,
    advantage_distill,
    block_error,
    cascade_reconcile,
    privacy_amplify,
    toeplitz_hash,
)
from keyforge.rng import RandomSource, generator
from keyforge.runner import report_csv, report_json, run_experiment
from keyforge.skapd import ml_decode, run_skapd
from keyforge.substitution import run_substitution

# 0.95 quantile of the chi-square distribution with 15 degrees of freedom
CHI2_95_DF15 = 24.99579


def verdict(num: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def bsc_pair(n: int, delta: float, seed: int):
    rng = np.random.default_rng(seed)
    alice = rng.integers(0, 2, size=n, dtype=np.uint8)
    bob = alice ^ (rng.random(n) < delta).astype(np.uint8)
    return alice, bob


def test_criterion_1_sifting_statistics():
    t0 = time.perf_counter()
    res = run_bb84(100_000, 7)
    elapsed = time.perf_counter() - t0
    ok = (abs(res.sift_fraction - 0.5) <= 0.005
          and res.qber == 0.0
          and np.array_equal(res.alice_key, res.bob_key)
          and elapsed < 5.0)
    verdict(1, ok,
            f"passive sift_fraction={res.sift_fraction:.4f} (0.5±0.005), "
            f"qber={res.qber} (exact 0), keys bit-exact, {elapsed:.2f}s (<5s)")


def test_criterion_2_intercept_resend_signature():
    oracle_qber, oracle_acc = oracles.intercept_resend_stats()
    assert oracle_qber == Fraction(1, 4)
    assert oracle_acc == Fraction(3, 4)
    t0 = time.perf_counter()
    res = run_bb84(204_000, 5, eve="intercept")
    elapsed = time.perf_counter() - t0
    n = 100_000
    assert res.sifted_length >= n
    a = res.alice_key[:n]
    qber = float(np.mean(a != res.bob_key[:n]))
    acc = float(np.mean(res.eve_guesses[:n] == a))
    ok = (abs(qber - float(oracle_qber)) <= 0.01
          and abs(acc - float(oracle_acc)) <= 0.01
          and elapsed < 10.0)
    verdict(2, ok,
            f"intercept-resend qber={qber:.4f} vs oracle {float(oracle_qber)} "
            f"(±0.01), eve accuracy={acc:.4f} vs oracle {float(oracle_acc)} "
            f"(±0.01) over {n} sifted bits, {elapsed:.2f}s (<10s)")


def test_criterion_3_transport_substitution():
    t0 = time.perf_counter()
    exact = 0
    for seed in range(100):
        res = run_substitution(256, seed, "classical")
        if (res.eve_accuracy == 1.0
                and np.array_equal(res.eve_guesses, res.alice_key)
                and np.array_equal(res.alice_key, res.bob_key)):
            exact += 1
    oracle_run = run_substitution(40_000, 777, "oracle")
    elapsed = time.perf_counter() - t0
    agree = np.array_equal(oracle_run.alice_key, oracle_run.bob_key)
    acc = oracle_run.eve_accuracy
    ok = (exact == 100
          and abs(acc - 0.5) <= 0.02
          and agree
          and elapsed < 10.0)
    verdict(3, ok,
            f"classical transport reconstructed exactly in {exact}/100 seeds, "
            f"oracle transport eve accuracy={acc:.4f} (0.5±0.02) with "
            f"bit-exact keys, {elapsed:.2f}s (<10s)")


def test_criterion_4_ml_decoding_oracle():
    assert float(oracles.ml_decode_error(1)) == 0.25
    t0 = time.perf_counter()
    details = []
    ok = True
    for n in (1, 2, 3):
        trials = 100_000
        sat = RandomSource(300 + n, "satellite")
        party = RandomSource(300 + n, "alice")
        from keyforge.channels import PulseRecord
        from keyforge.model import BASES, state_of
        bits = sat.bits(trials)
        bases = sat.bits(trials)
        errors = 0
        for i in range(trials):
            state = state_of(int(bits[i]), BASES[bases[i]])
            bundle = [PulseRecord(state, i) for _ in range(n)]
            errors += ml_decode(bundle, party) != bits[i]
        got = errors / trials
        want = float(oracles.ml_decode_error(n))
        ok = ok and abs(got - want) <= 0.01
        details.append(f"n={n}: {got:.4f} vs {want:.4f}")
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 30.0
    verdict(4, ok,
            f"ml decode error rates ({'; '.join(details)}) within ±0.01 at "
            f"10^5 trials, n=1 oracle exactly 0.25, {elapsed:.2f}s (<30s)")


def test_criterion_5_distillation_closed_form():
    t0 = time.perf_counter()
    exact_ok = True
    for num, den in ((1, 10), (1, 5), (3, 10)):
        for n in (1, 2, 3, 4):
            _, oracle_err = oracles.distill_accept_error(Fraction(num, den), n)
            exact_ok = exact_ok and abs(
                block_error(num / den, n) - float(oracle_err)) < 1e-12
    mc_ok = True
    worst = 0.0
    for delta in (0.1, 0.2, 0.3):
        for n in (1, 2, 3, 4):
            blocks = 10_000
            alice, bob = bsc_pair(blocks * n, delta, seed=int(delta * 100) + n)
            ch = ClassicalChannel("public")
            ch.add_output("eve")
            a2, b2, _, _ = advantage_distill(alice, bob, n, ch,
                                             RandomSource(1, "alice"))
            got = float(np.mean(a2 != b2))
            diff = abs(got - block_error(delta, n))
            worst = max(worst, diff)
            mc_ok = mc_ok and diff <= 0.02
    elapsed = time.perf_counter() - t0
    ok = exact_ok and mc_ok and elapsed < 30.0
    verdict(5, ok,
            "accepted-bit error equals d^N/(d^N+(1-d)^N) exactly against the "
            f"2^N enumeration oracle and by Monte-Carlo at 10^4 blocks "
            f"(worst |diff|={worst:.4f}, ±0.02), {elapsed:.2f}s (<30s)")


def test_criterion_6_cascade_convergence():
    t0 = time.perf_counter()
    converged = 0
    leak_exact = 0
    trials = 100
    for t in range(trials):
        alice, bob = bsc_pair(4096, 0.05, seed=1000 + t)
        ch = ClassicalChannel("public")
        tap = ch.add_output("eve")
        corrected, ledger = cascade_reconcile(
            alice, bob, 15, 4, ch, generator(2000 + t, "public/cascade"))
        if np.array_equal(corrected, alice):
            converged += 1
        if ledger.leaked == tap.bit_count():
            leak_exact += 1
    elapsed = time.perf_counter() - t0
    ok = converged >= 99 and leak_exact == trials and elapsed < 60.0
    verdict(6, ok,
            f"cascade at delta=0.05 L=4096 k1=15 P=4: residual 0 in "
            f"{converged}/100 trials (>=99), leakage == tap bits in "
            f"{leak_exact}/100 (exact all), {elapsed:.2f}s (<60s)")


def test_criterion_7_privacy_amplification():
    t0 = time.perf_counter()
    # linearity on 10^3 random pairs
    rng = np.random.default_rng(99)
    n, r = 64, 24
    lin_ok = True
    for _ in range(1000):
        seed = rng.integers(0, 2, size=n + r - 1, dtype=np.uint8)
        a = rng.integers(0, 2, size=n, dtype=np.uint8)
        b = rng.integers(0, 2, size=n, dtype=np.uint8)
        if not np.array_equal(toeplitz_hash(seed, a ^ b, r),
                              toeplitz_hash(seed, a, r)
                              ^ toeplitz_hash(seed, b, r)):
            lin_ok = False
            break

    # uniformity: n=12, r=4, every input, 50 public hash seeds
    n_u, r_u = 12, 4
    inputs = ((np.arange(2 ** n_u)[:, None] >> np.arange(n_u)) & 1).astype(np.uint8)
    seed_src = RandomSource(77, "public/pa")
    seed_failures = 0
    pooled = np.zeros(2 ** r_u, dtype=np.int64)
    weights = 1 << np.arange(r_u)
    for _ in range(50):
        seed = seed_src.bits(n_u + r_u - 1)
        outputs = np.empty(2 ** n_u, dtype=np.int64)
        for i in range(2 ** n_u):
            outputs[i] = int(toeplitz_hash(seed, inputs[i], r_u) @ weights)
        counts = np.bincount(outputs, minlength=2 ** r_u)
        pooled += counts
        expected = 2 ** n_u / 2 ** r_u
        stat = float(((counts - expected) ** 2 / expected).sum())
        if stat > CHI2_95_DF15:
            seed_failures += 1
    pooled_expected = 50 * 2 ** n_u / 2 ** r_u
    pooled_stat = float(((pooled - pooled_expected) ** 2 / pooled_expected).sum())
    uniform_ok = seed_failures <= 1 and pooled_stat <= CHI2_95_DF15

    # length rule and abort
    key = RandomSource(5, "k").bits(8)
    final, _, _ = privacy_amplify(
        key, StageLedger("cascade", 8, 8, leaked=2, eve_knowledge_bound=2),
        2, RandomSource(1, "public/pa"))
    rule_ok = len(final) == 2
    try:
        privacy_amplify(
            key, StageLedger("cascade", 8, 8, leaked=4, eve_knowledge_bound=4),
            2, RandomSource(1, "public/pa"))
        abort_ok = False
    except InsufficientSecrecyMargin as exc:
        abort_ok = "insufficient secrecy margin" in str(exc)
    elapsed = time.perf_counter() - t0
    ok = lin_ok and uniform_ok and rule_ok and abort_ok and elapsed < 60.0
    verdict(7, ok,
            f"linearity on 10^3 pairs, uniformity chi2 (df=15, 95%): "
            f"{50 - seed_failures}/50 seeds pass, pooled stat="
            f"{pooled_stat:.2f} (<= {CHI2_95_DF15}), length rule 8-2-2-2=2 "
            f"and abort enforced, {elapsed:.2f}s (<60s)")


def test_criterion_8_end_to_end_pipeline():
    t0 = time.perf_counter()
    out = run_skapd(20_000, 5, 5, 1, 2, 4, 64, 2000, master_seed=42)
    elapsed = time.perf_counter() - t0
    acc = float(np.mean(out.eve_final == out.alice_final)) \
        if out.final_length else 1.0
    ok = (not out.aborted
          and out.final_length > 0
          and np.array_equal(out.alice_final, out.bob_final)
          and abs(acc - 0.5) <= 0.03
          and elapsed < 60.0)
    verdict(8, ok,
            f"pipeline n=(5,5,1) L=2e4 N=2: keys bit-exact, final length "
            f"{out.final_length} (>0), eve final-key accuracy {acc:.4f} "
            f"(0.5±0.03), {elapsed:.2f}s (<60s)")


def test_criterion_9_reproducibility(tmp_path):
    bb84_cfg = ExperimentConfig(kind="bb84", rounds=2000, seed=13, trials=4,
                                eve="intercept")
    skapd_cfg = ExperimentConfig(kind="skapd", length=2000, seed=21, trials=3,
                                 eve_bound=150, safety=32, format="json")

    r1 = run_experiment(bb84_cfg)
    r2 = run_experiment(bb84_cfg)
    twice_ok = (report_csv(r1) == report_csv(r2)
                and report_json(r1) == report_json(r2))

    serial = run_experiment(skapd_cfg, parallel=False)
    parallel = run_experiment(skapd_cfg, parallel=True)
    parallel_ok = (report_json(serial) == report_json(parallel)
                   and report_csv(serial) == report_csv(parallel))

    # and as files on disk, byte for byte
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    a.write_text(report_json(serial))
    b.write_text(report_json(parallel))
    files_ok = a.read_bytes() == b.read_bytes()

    ok = twice_ok and parallel_ok and files_ok
    verdict(9, ok,
            "same config twice gives byte-identical reports and parallel "
            "equals serial trial execution, for csv and json")
