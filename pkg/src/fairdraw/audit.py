"""Third-party verification of recorded transcripts.

The auditor replays the message log from scratch, recomputes every result
from the revealed shares, and only then compares against the claimed
outcome.  It never trusts the claimed outcome, the relay, or any single
stakeholder's view.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from . import crypto
from .model import canonical_encode_list
from .protocol import (
    CommitMessage,
    IncidentKind,
    Outcome,
    RevealMessage,
    compute_result,
    message_payload,
)
from .weights import candidate_at
from .wire import Transcript, encode_message

EXIT_FAIR = 0
EXIT_MANIPULATED = 2
EXIT_INCOMPLETE = 3
EXIT_FORMAT = 64


class Verdict(enum.Enum):
    FAIR = "fair"
    MANIPULATED = "manipulated"
    INCOMPLETE = "incomplete"


class FindingKind(enum.Enum):
    EARLY_REVEAL = "early_reveal"
    BINDING_VIOLATION = "binding_violation"
    EQUIVOCATION = "equivocation"
    REPLAY = "replay"
    BAD_SIGNATURE = "bad_signature"
    UNKNOWN_SENDER = "unknown_sender"
    CONFLICTING_REVEAL = "conflicting_reveal"
    DENIAL_TO_REVEAL = "denial_to_reveal"
    OUTCOME_MISMATCH = "outcome_mismatch"
    RELAY_OMISSION = "relay_omission"
    RELAY_ADDITION = "relay_addition"
    RELAY_SUBSTITUTION = "relay_substitution"


# Findings that void fairness, as opposed to mere liveness failures.
INTEGRITY_KINDS = frozenset(FindingKind) - {FindingKind.DENIAL_TO_REVEAL}


@dataclass(frozen=True)
class Finding:
    kind: FindingKind
    culprits: tuple[bytes, ...]
    evidence: tuple[int, ...]  # event indices into the transcript
    detail: str


@dataclass
class AuditReport:
    verdict: Verdict
    findings: list[Finding] = field(default_factory=list)
    stakeholder_status: dict[bytes, str] = field(default_factory=dict)
    recomputed_outcome: list[Outcome] | None = None

    @property
    def exit_code(self) -> int:
        return {
            Verdict.FAIR: EXIT_FAIR,
            Verdict.MANIPULATED: EXIT_MANIPULATED,
            Verdict.INCOMPLETE: EXIT_INCOMPLETE,
        }[self.verdict]


def _verify_commit(t: Transcript, spec_bytes: bytes, msg: CommitMessage) -> bool:
    pk = t.public_keys.get(msg.sender)
    if pk is None:
        return False
    try:
        return crypto.verify_message(pk, message_payload(spec_bytes, msg.digest), msg.signature)
    except Exception:
        return False


def audit_transcript(t: Transcript) -> AuditReport:
    """Replay, recompute, compare: the three audit steps over one transcript."""
    spec_bytes = canonical_encode_list(t.draws)
    roster = {s.fingerprint for s in t.draws.stakeholders()}
    session_ids = t.session_draw_ids()
    findings: list[Finding] = []
    commits: dict[bytes, tuple[int, CommitMessage]] = {}
    reveals: dict[bytes, tuple[int, RevealMessage]] = {}

    def add(kind, culprits, evidence, detail):
        findings.append(Finding(kind, tuple(culprits), tuple(evidence), detail))

    for idx, event in enumerate(t.events):
        msg = event.message
        if isinstance(msg, CommitMessage):
            if msg.sender not in roster:
                add(FindingKind.UNKNOWN_SENDER, [msg.sender], [idx],
                    "commitment from a sender outside the roster")
                continue
            if msg.draw_ids != session_ids or msg.chain != t.chain:
                add(FindingKind.REPLAY, [msg.sender], [idx],
                    "commitment references a different drawing "
                    f"({', '.join(d.render_lenient() for d in msg.draw_ids)})")
                continue
            if not _verify_commit(t, spec_bytes, msg):
                add(FindingKind.BAD_SIGNATURE, [msg.sender], [idx],
                    "commitment signature does not verify")
                continue
            prior = commits.get(msg.sender)
            if prior is not None:
                if prior[1].digest != msg.digest:
                    add(FindingKind.EQUIVOCATION, [msg.sender], [prior[0], idx],
                        "two different validly signed commitments for one drawing")
                continue
            commits[msg.sender] = (idx, msg)
        else:
            if len(commits) < len(roster):
                add(FindingKind.EARLY_REVEAL, [msg.sender], [idx],
                    "reveal published before all commitments were recorded")
            if msg.sender not in roster:
                add(FindingKind.UNKNOWN_SENDER, [msg.sender], [idx],
                    "reveal from a sender outside the roster")
                continue
            committed = commits.get(msg.sender)
            if committed is None:
                add(FindingKind.UNKNOWN_SENDER, [msg.sender], [idx],
                    "reveal from a sender with no recorded commitment")
                continue
            prior = reveals.get(msg.sender)
            if prior is not None:
                if prior[1] != msg:
                    add(FindingKind.CONFLICTING_REVEAL, [msg.sender], [prior[0], idx],
                        "two different reveals from one sender")
                continue
            ok = _opening_valid(t, committed[1], msg)
            if not ok:
                add(FindingKind.BINDING_VIOLATION, [msg.sender], [committed[0], idx],
                    "revealed values do not open the signed commitment")
                continue
            reveals[msg.sender] = (idx, msg)

    status: dict[bytes, str] = {}
    silent_commit = sorted(roster - set(commits))
    silent_reveal = sorted(set(commits) - set(reveals))
    for fp in roster:
        if fp in reveals:
            status[fp] = "revealed"
        elif fp in commits:
            status[fp] = "committed"
        else:
            status[fp] = "silent"

    complete = set(reveals) == roster
    recomputed: list[Outcome] | None = None
    if complete:
        recomputed = []
        for i, spec in enumerate(t.draws.draws):
            shares = [reveals[fp][1].shares[i] for fp in sorted(roster)]
            d = compute_result(shares, spec.eligible.index_space)
            recomputed.append(Outcome(spec.did, d, candidate_at(spec.eligible, d)))
        if t.claimed_outcome is not None:
            claimed = {o.draw_id: o for o in t.claimed_outcome}
            for out in recomputed:
                claim = claimed.get(out.draw_id)
                if claim is None or claim.result != out.result or claim.candidate != out.candidate:
                    add(FindingKind.OUTCOME_MISMATCH, [], [],
                        f"claimed outcome for {out.draw_id.render_lenient()} does not "
                        f"match the recomputed result d={out.result}")
    else:
        missing = silent_commit + silent_reveal
        add(FindingKind.DENIAL_TO_REVEAL, missing, [],
            "missing messages from "
            + ", ".join(fp.hex()[:12] for fp in missing))

    if any(f.kind in INTEGRITY_KINDS for f in findings):
        verdict = Verdict.MANIPULATED
    elif not complete:
        verdict = Verdict.INCOMPLETE
    else:
        verdict = Verdict.FAIR
    return AuditReport(
        verdict=verdict,
        findings=findings,
        stakeholder_status=status,
        recomputed_outcome=recomputed,
    )


def _opening_valid(t: Transcript, commit_msg: CommitMessage, reveal: RevealMessage) -> bool:
    if len(reveal.shares) != len(t.draws.draws):
        return False
    if t.chain:
        return crypto.verify_chain(
            commit_msg.digest, t.draws, reveal.mask, list(reveal.shares)
        )
    return crypto.open_commitment(
        commit_msg.digest, t.draws.draws[0], reveal.mask, reveal.shares[0]
    )


def detect_equivocation(transcripts: list[Transcript]) -> list[Finding]:
    """Compare validly signed commitments for one drawing across views."""
    seen: dict[tuple, dict[bytes, list[tuple[int, int]]]] = {}
    for t_idx, t in enumerate(transcripts):
        spec_bytes = canonical_encode_list(t.draws)
        for e_idx, event in enumerate(t.events):
            msg = event.message
            if not isinstance(msg, CommitMessage):
                continue
            if not _verify_commit(t, spec_bytes, msg):
                continue  # only signed content counts
            key = (msg.draw_ids, msg.chain, msg.sender)
            seen.setdefault(key, {}).setdefault(msg.digest, []).append((t_idx, e_idx))
    findings = []
    for (draw_ids, _, sender), digests in seen.items():
        if len(digests) > 1:
            evidence = tuple(e for places in digests.values() for _, e in places)
            findings.append(Finding(
                FindingKind.EQUIVOCATION, (sender,), evidence,
                f"stakeholder signed {len(digests)} distinct commitments for "
                + ", ".join(d.render_lenient() for d in draw_ids),
            ))
    return findings


def cross_check_relay(local_view: Transcript, relay_view: Transcript) -> list[Finding]:
    """Set-difference the two views' messages; attribute substitutions."""
    findings = []

    def keyed(t: Transcript):
        return {encode_message(e.message): (i, e.message) for i, e in enumerate(t.events)}

    local = keyed(local_view)
    relay = keyed(relay_view)
    local_commits = {
        m.sender: m for _, m in local.values() if isinstance(m, CommitMessage)
    }
    relay_commits = {
        m.sender: m for _, m in relay.values() if isinstance(m, CommitMessage)
    }
    relay_spec_bytes = canonical_encode_list(relay_view.draws)

    for raw, (idx, msg) in local.items():
        if raw in relay:
            continue
        if isinstance(msg, CommitMessage) and msg.sender in relay_commits:
            other = relay_commits[msg.sender]
            if other.digest != msg.digest:
                findings.append(Finding(
                    FindingKind.RELAY_SUBSTITUTION, (msg.sender,), (idx,),
                    "relay serves a different commitment than the one seen locally"))
                if _verify_commit(relay_view, relay_spec_bytes, other):
                    findings.append(Finding(
                        FindingKind.EQUIVOCATION, (msg.sender,), (idx,),
                        "the substituted commitment is validly signed: the "
                        "stakeholder equivocated with the relay's help"))
                continue
        findings.append(Finding(
            FindingKind.RELAY_OMISSION,
            (msg.sender,) if hasattr(msg, "sender") else (),
            (idx,),
            "message present in the local view is missing from the relay view"))

    for raw, (idx, msg) in relay.items():
        if raw in local:
            continue
        if isinstance(msg, CommitMessage) and msg.sender in local_commits:
            continue  # already reported as a substitution above
        findings.append(Finding(
            FindingKind.RELAY_ADDITION, (), (idx,),
            "relay serves a message the local view never saw"))
    return findings
