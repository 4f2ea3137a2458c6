import random
from dataclasses import replace

import pytest

from fairdraw import (
    DrawId,
    DrawList,
    DrawSpec,
    Phase,
    RevealMessage,
    Session,
    SpecError,
    StateError,
    compute_result,
    start_session,
)
from fairdraw import crypto
from fairdraw.protocol import IncidentKind

from conftest import run_honest_session


def test_start_session_commit_opens(basic_spec, four_parties):
    parties, _, keymap = four_parties
    sid, sk = parties[0]
    session, msg, opening = start_session(basic_spec, sid, sk, keymap)
    assert session.phase is Phase.COMMITTING
    assert msg.sender == sid.fingerprint
    assert crypto.open_commitment(msg.digest, basic_spec, opening.mask, opening.shares[0])


def test_start_session_requires_membership(basic_spec):
    from conftest import make_keypair
    from fairdraw import StakeholderId

    sk, pk = make_keypair("outsider")
    outsider = StakeholderId(crypto.fingerprint(pk), "outsider")
    keys = {s.fingerprint: b"\x00" * 32 for s in basic_spec.stakeholders}
    with pytest.raises(SpecError):
        start_session(basic_spec, outsider, sk, keys)


def test_chain_commit_matches_manual(chain_spec, four_parties):
    parties, _, keymap = four_parties
    sid, sk = parties[0]
    session, msg, opening = start_session(chain_spec, sid, sk, keymap)
    assert msg.chain
    assert crypto.verify_chain(msg.digest, chain_spec, opening.mask, list(opening.shares))


def test_honest_round(basic_spec, four_parties):
    parties, _, keymap = four_parties
    sessions, _, _ = run_honest_session(basic_spec, parties, keymap)
    outcomes = {fp: s.session_outcome() for fp, s in sessions.items()}
    first = next(iter(outcomes.values()))
    assert all(o == first for o in outcomes.values())
    assert len(first) == 1
    assert 0 <= first[0].result < 5


def test_honest_chain_round(chain_spec, four_parties):
    parties, _, keymap = four_parties
    sessions, _, _ = run_honest_session(chain_spec, parties, keymap)
    first = next(iter(sessions.values())).session_outcome()
    assert [o.draw_id for o in first] == [s.did for s in chain_spec.draws]


def test_receive_commit_idempotent(basic_spec, four_parties):
    parties, _, keymap = four_parties
    (sid_a, sk_a), (sid_b, sk_b) = parties[0], parties[1]
    session, _, _ = start_session(basic_spec, sid_a, sk_a, keymap)
    other, msg_b, _ = start_session(basic_spec, sid_b, sk_b, keymap)
    assert session.receive_commit(msg_b)
    before = dict(session.commits)
    assert session.receive_commit(msg_b)
    assert session.commits == before


def test_receive_commit_cross_session_replay(basic_spec, four_parties):
    # a commitment signed for X#0 must be rejected in session X#1
    parties, _, keymap = four_parties
    (sid_a, sk_a), (sid_b, sk_b) = parties[0], parties[1]
    successor = replace(basic_spec, did=basic_spec.did.next_counter())
    session, _, _ = start_session(successor, sid_a, sk_a, keymap)
    _, stale_msg, _ = start_session(basic_spec, sid_b, sk_b, keymap)
    assert not session.receive_commit(stale_msg)
    assert any(i.kind is IncidentKind.REPLAY for i in session.incidents)
    assert sid_b.fingerprint not in session.commits


def test_receive_commit_draw_ref_rewrite_fails_signature(basic_spec, four_parties):
    # rewriting the draw_ref to match the target session breaks the signature
    parties, _, keymap = four_parties
    (sid_a, sk_a), (sid_b, sk_b) = parties[0], parties[1]
    successor = replace(basic_spec, did=basic_spec.did.next_counter())
    session, _, _ = start_session(successor, sid_a, sk_a, keymap)
    _, stale_msg, _ = start_session(basic_spec, sid_b, sk_b, keymap)
    forged = replace(stale_msg, draw_ids=(successor.did,))
    assert not session.receive_commit(forged)
    assert any(i.kind is IncidentKind.BAD_SIGNATURE for i in session.incidents)


def test_receive_commit_equivocation_aborts(basic_spec, four_parties):
    parties, _, keymap = four_parties
    (sid_a, sk_a), (sid_b, sk_b) = parties[0], parties[1]
    session, _, _ = start_session(basic_spec, sid_a, sk_a, keymap)
    peer = Session(basic_spec, keymap, self_id=sid_b)
    peer.begin()
    first, _ = peer.make_commit(sk_b)
    second, _ = peer.make_commit(sk_b)
    assert first.digest != second.digest
    assert session.receive_commit(first)
    assert not session.receive_commit(second)
    assert session.phase is Phase.ABORTED
    assert session.abort_report.reason is IncidentKind.EQUIVOCATION
    assert session.abort_report.culprits == (sid_b.fingerprint,)


def test_receive_reveal_binding_violation(basic_spec, four_parties):
    parties, _, keymap = four_parties
    sessions, commits, _ = run_honest_session(basic_spec, parties, keymap)
    fp_victim = parties[0][0].fingerprint
    sid_b, sk_b = parties[1]
    # fresh session replay with a tampered reveal from party 1
    session, own, opening = start_session(basic_spec, parties[0][0], parties[0][1], keymap)
    for msg in commits:
        if msg.sender != fp_victim:
            session.receive_commit(msg)
    assert session.phase is Phase.REVEALING
    tampered = RevealMessage(sender=sid_b.fingerprint, mask=b"\x00" * 32, shares=(1,))
    assert not session.receive_reveal(tampered)
    assert session.phase is Phase.ABORTED
    assert session.abort_report.culprits == (sid_b.fingerprint,)


def test_early_reveal_rejected_and_logged(basic_spec, four_parties):
    parties, _, keymap = four_parties
    sid_a, sk_a = parties[0]
    session, _, opening = start_session(basic_spec, sid_a, sk_a, keymap)
    early = RevealMessage(sender=sid_a.fingerprint, mask=opening.mask,
                          shares=opening.shares)
    assert not session.receive_reveal(early)
    assert any(i.kind is IncidentKind.EARLY_REVEAL for i in session.incidents)
    assert not session.reveals


def test_no_early_reveal_gate_all_phases(basic_spec, four_parties):
    # make_reveal only succeeds in Revealing, across every reachable phase
    parties, _, keymap = four_parties
    sid_a, sk_a = parties[0]
    observer = Session(basic_spec, keymap, self_id=sid_a)
    opening_stub = None
    # SETUP
    with pytest.raises(StateError):
        observer.make_reveal(opening_stub)
    session, _, opening = start_session(basic_spec, sid_a, sk_a, keymap)
    # COMMITTING
    with pytest.raises(StateError):
        session.make_reveal(opening)
    for sid, sk in parties[1:]:
        peer, msg, _ = start_session(basic_spec, sid, sk, keymap)
        session.receive_commit(msg)
    # REVEALING: allowed exactly here
    assert session.phase is Phase.REVEALING
    reveal = session.make_reveal(opening)
    assert reveal.shares == opening.shares


def test_share_count_mismatch(chain_spec, four_parties):
    parties, _, keymap = four_parties
    sessions, commits, reveals = run_honest_session(chain_spec, parties, keymap)
    sid_a, sk_a = parties[0]
    session, _, _ = start_session(chain_spec, sid_a, sk_a, keymap)
    for msg in commits:
        if msg.sender != sid_a.fingerprint:
            session.receive_commit(msg)
    bad = replace(reveals[0], shares=reveals[0].shares[:2])
    assert not session.receive_reveal(bad)
    assert any(i.kind is IncidentKind.SHARE_COUNT_MISMATCH for i in session.incidents)


def test_chain_mid_share_mutation_aborts(chain_spec, four_parties):
    parties, _, keymap = four_parties
    sid_a, sk_a = parties[0]
    sid_b, sk_b = parties[1]
    session, _, _ = start_session(chain_spec, sid_a, sk_a, keymap)
    peer_msgs = {}
    openings = {}
    for sid, sk in parties[1:]:
        _, msg, opening = start_session(chain_spec, sid, sk, keymap)
        session.receive_commit(msg)
        openings[sid.fingerprint] = opening
    assert session.phase is Phase.REVEALING
    opening_b = openings[sid_b.fingerprint]
    mutated = list(opening_b.shares)
    mutated[1] = (mutated[1] + 1) % 5
    bad = RevealMessage(sender=sid_b.fingerprint, mask=opening_b.mask,
                        shares=tuple(mutated))
    assert not session.receive_reveal(bad)
    assert session.phase is Phase.ABORTED


def test_compute_result():
    assert compute_result([0, 0, 0], 5) == 0
    assert compute_result([3, 5, 9], 7) == 3  # 17 mod 7
    assert compute_result([11], 4) == 3
    with pytest.raises(SpecError):
        compute_result([1], 0)
    with pytest.raises(SpecError):
        compute_result([], 5)


def test_result_symmetry():
    rng = random.Random(5)
    for _ in range(200):
        shares = [rng.randrange(100) for _ in range(rng.randint(1, 8))]
        permuted = list(shares)
        rng.shuffle(permuted)
        assert compute_result(shares, 13) == compute_result(permuted, 13)


def test_session_outcome_hand_computed(four_parties):
    from fairdraw import CandidateId, StakeholderId, WeightedEligibleList

    parties, roster, keymap = four_parties
    eligible = WeightedEligibleList((
        (CandidateId("e0"), 1), (CandidateId("e1"), 2),
        (CandidateId("e2"), 3), (CandidateId("e3"), 4),
    ))
    spec = DrawSpec(DrawId("case", 0), roster, eligible)
    sessions, _, _ = run_honest_session(spec, parties, keymap)
    session = next(iter(sessions.values()))
    outcome = session.session_outcome()[0]
    shares = [r.shares[0] for r in session.reveals.values()]
    assert outcome.result == sum(shares) % 10
    # weighted layout: d = 9 falls in e3's block
    if outcome.result == 9:
        assert outcome.candidate == CandidateId("e3")


def test_chain_determinism_fuzz(four_parties):
    parties, roster, keymap = four_parties
    from fairdraw import CandidateId, uniform_list

    rng = random.Random(11)
    for length in [1, 2, 5, 9, 17, 32]:
        eligible = uniform_list([CandidateId(f"c{i}") for i in range(rng.randint(2, 9))])
        draws = DrawList(tuple(
            DrawSpec(DrawId(f"fuzz-{i:02d}", 0), roster, eligible) for i in range(length)
        ))
        sid, sk = parties[0]
        _, msg, opening = start_session(draws, sid, sk, keymap)
        assert crypto.verify_chain(msg.digest, draws, opening.mask, list(opening.shares))
        # pure function of (specs, mask, shares): recompute twice
        assert crypto.chain_commit(draws, opening.mask, list(opening.shares)) == msg.digest


def test_timeout_names_culprits(basic_spec, four_parties):
    parties, _, keymap = four_parties
    sid_a, sk_a = parties[0]
    session, _, _ = start_session(basic_spec, sid_a, sk_a, keymap)
    for sid, sk in parties[1:3]:
        _, msg, _ = start_session(basic_spec, sid, sk, keymap)
        session.receive_commit(msg)
    culprits = session.handle_timeout()
    assert culprits == (parties[3][0].fingerprint,)
    assert session.phase is Phase.ABORTED


def test_timeout_not_applicable_after_completion(basic_spec, four_parties):
    parties, _, keymap = four_parties
    sessions, _, _ = run_honest_session(basic_spec, parties, keymap)
    session = next(iter(sessions.values()))
    assert session.phase is Phase.COMPLETE
    with pytest.raises(StateError):
        session.handle_timeout()
