"""Two-phase link verification: threshold gate, block exchange, verdicts."""

import random

import pytest

from sfvsim.model import IdPool, NodeProfile, SymmetricId
from sfvsim.protocol import (
    HandshakeConfig,
    REASON_ID_MISMATCH,
    TranscriptEvent,
    Verdict,
    handshake_transcript,
    run_handshake,
    transcript_lines,
)
from sfvsim.ranging import REASON_DISTANCE, evidence_for_link, perturbed


def make_node(name, ids, role="honest"):
    pool = IdPool([SymmetricId(v) for v in ids])
    return NodeProfile(name, (0.0, 0.0), (0.0, 0.0), role, pool)


def friendly_pair(ids=(10, 20, 30)):
    return make_node("a", ids), make_node("b", ids)


GOOD = evidence_for_link(150.0, 30.0, 230.0)
FAR = perturbed(GOOD, d_radial=500.0)


# ----------------------------------------------------------------- contracts

def test_config_validation():
    HandshakeConfig()
    with pytest.raises(ValueError):
        HandshakeConfig(m_blocks=0)
    with pytest.raises(ValueError):
        HandshakeConfig(n_ranging=0)
    with pytest.raises(ValueError):
        HandshakeConfig(retry_limit=-1)


def test_verdict_consistency_enforced():
    Verdict("friendly", (), 4, 4)
    Verdict("suspicious", ("threshold-distance",), 0, 4)
    with pytest.raises(ValueError):
        Verdict("friendly", ("threshold-distance",), 4, 4)
    with pytest.raises(ValueError):
        Verdict("friendly", (), 3, 4)
    with pytest.raises(ValueError):
        Verdict("suspicious", (), 4, 4)


# ---------------------------------------------------------------- handshakes

def test_friendly_handshake():
    a, b = friendly_pair()
    verdict = run_handshake(a, b, GOOD, rng=random.Random(1))
    assert verdict.friendly
    assert verdict.outcome == "friendly"
    assert verdict.reasons == ()
    assert verdict.blocks_verified == verdict.m_blocks == 4


def test_pools_rotate_in_lockstep():
    a, b = friendly_pair(ids=(1, 2, 3))
    for round_number in range(5):
        verdict = run_handshake(a, b, GOOD, rng=random.Random(round_number))
        assert verdict.friendly
    # cursor wrapped: 5 handshakes over a 3-id pool
    assert a.pool.next_index == b.pool.next_index == 5 % 3


def test_threshold_failure_skips_block_phase():
    a, b = friendly_pair()
    verdict = run_handshake(a, b, FAR, rng=random.Random(2))
    assert not verdict.friendly
    assert REASON_DISTANCE in verdict.reasons
    assert verdict.blocks_verified == 0
    # no ids consumed when the gate never opens
    assert a.pool.next_index == 0


def test_retry_consumes_fresh_evidence():
    calls = []

    def flaky():
        calls.append(None)
        return FAR if len(calls) == 1 else GOOD

    a, b = friendly_pair()
    verdict = run_handshake(a, b, flaky, HandshakeConfig(retry_limit=1),
                            rng=random.Random(3))
    assert verdict.friendly
    assert len(calls) == 2


def test_retry_limit_exhaustion_reports_last_attempt():
    a, b = friendly_pair()
    calls = []

    def always_far():
        calls.append(None)
        return FAR

    verdict = run_handshake(a, b, always_far, HandshakeConfig(retry_limit=2),
                            rng=random.Random(4))
    assert not verdict.friendly
    assert verdict.reasons == (REASON_DISTANCE,)
    assert len(calls) == 3  # initial try plus two retries


def test_zero_retries_single_attempt():
    a, b = friendly_pair()
    calls = []

    def always_far():
        calls.append(None)
        return FAR

    run_handshake(a, b, always_far, HandshakeConfig(retry_limit=0),
                  rng=random.Random(5))
    assert len(calls) == 1


def test_disjoint_ids_rejected_with_reasons():
    a = make_node("honest", (10, 20))
    imp = make_node("imp", (1 << 20,), role="sybil")
    verdict = run_handshake(a, imp, GOOD, rng=random.Random(6))
    assert not verdict.friendly
    assert verdict.reasons[0] == "checksum-block-1"
    assert REASON_ID_MISMATCH in verdict.reasons
    assert verdict.blocks_verified == 0


def test_asymmetric_measurement_fails_without_id_blame():
    # same credential pool, but the responder quantizes a different RTT:
    # seeds diverge, the first block garbles, and no forged id is implied
    a, b = friendly_pair()
    responder_view = perturbed(GOOD, rtt=GOOD.rtt + 5e-9)
    verdict = run_handshake(a, b, GOOD, rng=random.Random(7),
                            responder_evidence=responder_view)
    assert not verdict.friendly
    assert verdict.reasons == ("checksum-block-1",)


def test_early_abort_stops_at_first_bad_block():
    a = make_node("honest", (10,))
    imp = make_node("imp", (99,), role="sybil")
    events = handshake_transcript(a, imp, GOOD, rng=random.Random(8))
    exchanges = [e for e in events if e.phase == "exchange"]
    assert len(exchanges) == 1
    assert exchanges[0].outcome == "rejected"


# --------------------------------------------------------------- transcripts

def test_transcript_structure_for_friendly_run():
    a, b = friendly_pair()
    cfg = HandshakeConfig(m_blocks=4)
    events = handshake_transcript(a, b, GOOD, cfg, rng=random.Random(9))
    phases = [e.phase for e in events]
    assert phases == ["threshold", "setup", "setup",
                      "exchange", "exchange", "exchange", "exchange", "verdict"]
    blocks = [e for e in events if e.phase == "exchange"]
    assert [e.block_index for e in blocks] == [1, 2, 3, 4]
    assert all(e.outcome == "accepted" for e in blocks)
    assert events[-1] == TranscriptEvent("verdict", "final", None, "friendly")


def test_transcript_line_format():
    a, b = friendly_pair()
    events = handshake_transcript(a, b, GOOD, rng=random.Random(10))
    lines = transcript_lines(events)
    assert lines[0] == "threshold,attempt-1,,pass"
    assert any(line.startswith("exchange,block,1,") for line in lines)
    for line in lines:
        assert line.count(",") == 3


def test_transcript_deterministic_for_equal_seed():
    a1, b1 = friendly_pair()
    a2, b2 = friendly_pair()
    first = handshake_transcript(a1, b1, GOOD, rng=random.Random(11))
    second = handshake_transcript(a2, b2, GOOD, rng=random.Random(11))
    assert first == second


def test_transcript_records_threshold_violations():
    a, b = friendly_pair()
    events = handshake_transcript(a, b, FAR, rng=random.Random(12))
    assert TranscriptEvent("threshold", REASON_DISTANCE, None, "violated") in events
    assert events[-1].outcome == "suspicious"


# ------------------------------------------------------------- per-block gate

def test_single_block_config_soundness_sample():
    # m=1 leaves only the 16-bit checksum as the gate; a forged id should
    # still lose essentially always
    rng = random.Random(13)
    rejected = 0
    trials = 3_000
    for i in range(trials):
        a = make_node("honest", (10, 20))
        imp = make_node("imp", ((1 << 25) + i,), role="sybil")
        verdict = run_handshake(a, imp, GOOD, HandshakeConfig(m_blocks=1), rng=rng)
        rejected += not verdict.friendly
    assert rejected >= trials - 2
