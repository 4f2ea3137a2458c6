import hashlib

import pytest
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey

from fairdraw import (
    CandidateId,
    DrawId,
    DrawList,
    DrawSpec,
    StakeholderId,
    start_session,
    uniform_list,
)
from fairdraw import protocol
from fairdraw.crypto import fingerprint
from fairdraw.wire import Transcript, TranscriptEvent


def make_keypair(label: str):
    """Deterministic Ed25519 keypair for fixtures."""
    seed = hashlib.sha256(b"fairdraw test key " + label.encode()).digest()
    sk = Ed25519PrivateKey.from_private_bytes(seed)
    return sk, sk.public_key().public_bytes_raw()


def make_parties(n: int):
    """(list of (StakeholderId, sk), sorted roster, fingerprint->pk map)."""
    parties = []
    keymap = {}
    for i in range(n):
        sk, pk = make_keypair(f"party-{i}")
        fp = fingerprint(pk)
        parties.append((StakeholderId(fp, f"party-{i}"), sk))
        keymap[fp] = pk
    parties.sort(key=lambda p: p[0].fingerprint)
    roster = tuple(p[0] for p in parties)
    return parties, roster, keymap


@pytest.fixture(scope="session")
def four_parties():
    return make_parties(4)


@pytest.fixture
def basic_spec(four_parties):
    _, roster, _ = four_parties
    eligible = uniform_list([CandidateId(f"cand-{i}") for i in range(5)])
    return DrawSpec(DrawId("123.456-7", 0), roster, eligible, info="judge draw")


@pytest.fixture
def chain_spec(four_parties):
    _, roster, _ = four_parties
    eligible = uniform_list([CandidateId(f"cand-{i}") for i in range(5)])
    return DrawList(tuple(
        DrawSpec(DrawId("123.456-7", i), roster, eligible) for i in range(3)
    ))


def run_honest_session(spec, parties, keymap):
    """Drive every participant in-process; returns per-party sessions."""
    sessions = {}
    commits = []
    openings = {}
    for sid, sk in parties:
        session, msg, opening = start_session(spec, sid, sk, keymap)
        sessions[sid.fingerprint] = session
        openings[sid.fingerprint] = opening
        commits.append(msg)
    for msg in commits:
        for session in sessions.values():
            if session.phase is protocol.Phase.COMMITTING:
                session.receive_commit(msg)
    reveals = [
        sessions[fp].make_reveal(openings[fp]) for fp in sessions
    ]
    for msg in reveals:
        for session in sessions.values():
            if session.phase is not protocol.Phase.COMPLETE:
                session.receive_reveal(msg)
    return sessions, commits, reveals


def build_transcript(spec, parties, keymap, claimed="auto"):
    """Honest transcript fixture: all commits in order, then all reveals."""
    sessions, commits, reveals = run_honest_session(spec, parties, keymap)
    draws = spec if isinstance(spec, DrawList) else DrawList((spec,))
    events = [TranscriptEvent(float(i), m) for i, m in enumerate(commits + reveals)]
    any_session = next(iter(sessions.values()))
    outcome = list(any_session.session_outcome())
    return Transcript(
        draws=draws,
        chain=isinstance(spec, DrawList),
        public_keys=dict(keymap),
        events=events,
        claimed_outcome=outcome if claimed == "auto" else claimed,
    )
