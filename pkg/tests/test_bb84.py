"""Protocol-level checks for the four-state scheme: sifting statistics,
perfect agreement without interference, and the intercept-resend signature
cross-checked against the enumeration oracle."""

import numpy as np
import pytest

import oracles
from keyforge.bb84 import eve_accuracy, run_bb84


def test_passive_run_agrees_exactly():
    res = run_bb84(20000, 7)
    assert res.qber == 0.0
    assert np.array_equal(res.alice_key, res.bob_key)
    assert abs(res.sift_fraction - 0.5) < 0.02
    assert res.eve_guesses is None


def test_passive_transcript_is_two_bits_per_round():
    res = run_bb84(500, 3)
    assert res.transcript.bit_count("public") == 1000
    assert res.eve_tap_bits == 1000


def test_deterministic_given_seed():
    a = run_bb84(3000, 99)
    b = run_bb84(3000, 99)
    assert np.array_equal(a.alice_key, b.alice_key)
    assert np.array_equal(a.sifted_indices, b.sifted_indices)
    c = run_bb84(3000, 100)
    assert not np.array_equal(a.alice_key, c.alice_key)


def test_sifted_positions_match_announced_verdicts():
    res = run_bb84(400, 12)
    verdicts = {}
    for r, sender, payload in res.transcript.for_channel("public"):
        if sender == "alice":
            verdicts[r] = payload[0]
    kept = {int(i) for i in res.sifted_indices}
    assert kept == {r for r, v in verdicts.items() if v == 1}


def test_intercept_resend_signature_matches_oracle():
    oracle_qber, oracle_acc = oracles.intercept_resend_stats()
    res = run_bb84(40000, 5, eve="intercept")
    assert abs(res.qber - float(oracle_qber)) < 0.02
    assert abs(eve_accuracy(res) - float(oracle_acc)) < 0.02
    # attack leaves mismatched sifted bits, never a silent clean run
    assert res.qber > 0.2


def test_intercept_guesses_cover_sifted_rounds():
    res = run_bb84(2000, 8, eve="intercept")
    assert res.eve_guesses is not None
    assert len(res.eve_guesses) == res.sifted_length
    assert np.array_equal(res.eve_guesses,
                          res.eve_outcomes[res.sifted_indices])


def test_eve_accuracy_none_for_passive():
    assert eve_accuracy(run_bb84(100, 1)) is None


def test_input_validation():
    with pytest.raises(ValueError):
        run_bb84(0, 1)
    with pytest.raises(ValueError):
        run_bb84(10, 1, eve="jam")
