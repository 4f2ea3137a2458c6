"""Two-phase session state machine: commit, then reveal, then the result.

A session is a single logical state machine; callers apply one message at a
time.  The reveal phase is entered only once every stakeholder's commitment
has been received and its signature verified, and the private opening is
never emitted before that point.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from . import crypto
from .errors import SpecError, StateError
from .model import DrawId, DrawList, DrawSpec, StakeholderId, canonical_encode, canonical_encode_list
from .weights import CandidateId, candidate_at


class Phase(enum.Enum):
    SETUP = "setup"
    COMMITTING = "committing"
    REVEALING = "revealing"
    COMPLETE = "complete"
    ABORTED = "aborted"


class IncidentKind(enum.Enum):
    BAD_SIGNATURE = "bad_signature"
    UNKNOWN_SENDER = "unknown_sender"
    REPLAY = "replay"
    EQUIVOCATION = "equivocation"
    EARLY_REVEAL = "early_reveal"
    BINDING_VIOLATION = "binding_violation"
    SHARE_COUNT_MISMATCH = "share_count_mismatch"
    CONFLICTING_REVEAL = "conflicting_reveal"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class CommitMessage:
    """Signed commitment broadcast: {draw(s), C, signature}."""

    draw_ids: tuple[DrawId, ...]
    chain: bool
    sender: bytes  # stakeholder fingerprint
    digest: bytes
    signature: bytes


@dataclass(frozen=True)
class RevealMessage:
    """Unsigned disclosure of (mask, shares); validated against the commitment."""

    sender: bytes
    mask: bytes
    shares: tuple[int, ...]


@dataclass(frozen=True)
class Opening:
    """Private half of a commitment, kept local until the reveal phase."""

    mask: bytes
    shares: tuple[int, ...]


@dataclass(frozen=True)
class Incident:
    kind: IncidentKind
    sender: bytes | None
    detail: str


@dataclass(frozen=True)
class AbortReport:
    reason: IncidentKind
    culprits: tuple[bytes, ...]
    detail: str


@dataclass(frozen=True)
class Outcome:
    draw_id: DrawId
    result: int
    candidate: CandidateId


def compute_result(shares: list[int], index_space: int) -> int:
    """d = (sum of shares) mod index_space."""
    if index_space < 1:
        raise SpecError("index space must be positive")
    if not shares:
        raise SpecError("shares must be non-empty")
    return sum(shares) % index_space


def message_payload(spec_bytes: bytes, digest: bytes) -> bytes:
    """Bytes actually signed in a CommitMessage."""
    return crypto.TAG_MESSAGE + spec_bytes + digest


class Session:
    """One protocol run, for a participant or a passive observer."""

    def __init__(
        self,
        spec: DrawSpec | DrawList,
        public_keys: dict[bytes, bytes],
        self_id: StakeholderId | None = None,
    ):
        if isinstance(spec, DrawList):
            self.draws = spec
            self.chain = True
        else:
            self.draws = DrawList((spec,))
            self.chain = False
        self.spec_bytes = canonical_encode_list(self.draws)
        roster = self.draws.stakeholders()
        self.roster: dict[bytes, StakeholderId] = {s.fingerprint: s for s in roster}
        self.public_keys = dict(public_keys)
        missing_keys = set(self.roster) - set(self.public_keys)
        if missing_keys:
            raise SpecError(
                "missing public keys for stakeholders: "
                + ", ".join(fp.hex()[:12] for fp in sorted(missing_keys))
            )
        if self_id is not None and self_id.fingerprint not in self.roster:
            raise SpecError("local stakeholder is not in the roster")
        self.self_id = self_id
        self.phase = Phase.SETUP
        self.commits: dict[bytes, CommitMessage] = {}
        self.reveals: dict[bytes, RevealMessage] = {}
        self.incidents: list[Incident] = []
        self.outcome: tuple[Outcome, ...] | None = None
        self.abort_report: AbortReport | None = None

    @property
    def draw_ids(self) -> tuple[DrawId, ...]:
        return tuple(s.did for s in self.draws.draws)

    def _log(self, kind: IncidentKind, sender: bytes | None, detail: str) -> None:
        self.incidents.append(Incident(kind, sender, detail))

    def _abort(self, reason: IncidentKind, culprits: tuple[bytes, ...], detail: str) -> None:
        self.phase = Phase.ABORTED
        self.abort_report = AbortReport(reason, culprits, detail)

    def begin(self) -> None:
        """Enter the commit phase (observer entry point)."""
        if self.phase is not Phase.SETUP:
            raise StateError(f"cannot begin from phase {self.phase.value}")
        self.phase = Phase.COMMITTING

    def make_commit(self, sk) -> tuple[CommitMessage, Opening]:
        """Sample mask and shares, compute the (chained) digest, sign it."""
        if self.self_id is None:
            raise StateError("observer sessions cannot commit")
        mask = crypto.gen_mask()
        shares = tuple(
            crypto.gen_share(s.eligible.index_space) for s in self.draws.draws
        )
        if self.chain:
            digest = crypto.chain_commit(self.draws, mask, list(shares))
        else:
            digest = crypto.commit(self.draws.draws[0], mask, shares[0])
        signature = crypto.sign_message(sk, message_payload(self.spec_bytes, digest))
        msg = CommitMessage(
            draw_ids=self.draw_ids,
            chain=self.chain,
            sender=self.self_id.fingerprint,
            digest=digest,
            signature=signature,
        )
        return msg, Opening(mask=mask, shares=shares)

    def receive_commit(self, msg: CommitMessage) -> bool:
        """Record a verified commitment; returns True iff the message counted."""
        if self.phase is not Phase.COMMITTING:
            raise StateError(f"commit received in phase {self.phase.value}")
        if msg.draw_ids != self.draw_ids or msg.chain != self.chain:
            self._log(IncidentKind.REPLAY, msg.sender,
                      "commitment references "
                      + ", ".join(d.render_lenient() for d in msg.draw_ids))
            return False
        if msg.sender not in self.roster:
            self._log(IncidentKind.UNKNOWN_SENDER, msg.sender, "sender not in roster")
            return False
        try:
            ok = crypto.verify_message(
                self.public_keys[msg.sender],
                message_payload(self.spec_bytes, msg.digest),
                msg.signature,
            )
        except Exception as exc:
            self._log(IncidentKind.BAD_SIGNATURE, msg.sender, f"malformed signature: {exc}")
            return False
        if not ok:
            self._log(IncidentKind.BAD_SIGNATURE, msg.sender, "signature does not verify")
            return False
        previous = self.commits.get(msg.sender)
        if previous is not None:
            if previous.digest == msg.digest:
                return True  # idempotent redelivery
            self._log(IncidentKind.EQUIVOCATION, msg.sender,
                      f"second commitment {msg.digest.hex()[:16]} differs from "
                      f"{previous.digest.hex()[:16]}")
            self._abort(IncidentKind.EQUIVOCATION, (msg.sender,),
                        "two different signed commitments from one sender")
            return False
        self.commits[msg.sender] = msg
        if set(self.commits) == set(self.roster):
            self.phase = Phase.REVEALING
        return True

    def make_reveal(self, opening: Opening) -> RevealMessage:
        """Disclose the opening; legal only once all commitments are verified."""
        if self.self_id is None:
            raise StateError("observer sessions cannot reveal")
        if self.phase is not Phase.REVEALING:
            raise StateError(
                f"reveal is not permitted in phase {self.phase.value}; "
                "all commitments must be received and verified first"
            )
        return RevealMessage(
            sender=self.self_id.fingerprint, mask=opening.mask, shares=opening.shares
        )

    def _reveal_opens(self, commit: CommitMessage, msg: RevealMessage) -> bool:
        if self.chain:
            return crypto.verify_chain(
                commit.digest, self.draws, msg.mask, list(msg.shares)
            )
        return crypto.open_commitment(
            commit.digest, self.draws.draws[0], msg.mask, msg.shares[0]
        )

    def receive_reveal(self, msg: RevealMessage) -> bool:
        if self.phase is Phase.COMMITTING:
            self._log(IncidentKind.EARLY_REVEAL, msg.sender,
                      "reveal received before all commitments were verified")
            return False
        if self.phase is not Phase.REVEALING:
            raise StateError(f"reveal received in phase {self.phase.value}")
        if msg.sender not in self.commits:
            self._log(IncidentKind.UNKNOWN_SENDER, msg.sender,
                      "reveal from sender without a recorded commitment")
            return False
        if len(msg.shares) != len(self.draws.draws):
            self._log(IncidentKind.SHARE_COUNT_MISMATCH, msg.sender,
                      f"expected {len(self.draws.draws)} shares, got {len(msg.shares)}")
            return False
        previous = self.reveals.get(msg.sender)
        if previous is not None:
            if previous == msg:
                return True
            self._log(IncidentKind.CONFLICTING_REVEAL, msg.sender,
                      "second, different reveal from one sender")
            self._abort(IncidentKind.CONFLICTING_REVEAL, (msg.sender,),
                        "conflicting reveals")
            return False
        if not self._reveal_opens(self.commits[msg.sender], msg):
            self._log(IncidentKind.BINDING_VIOLATION, msg.sender,
                      "revealed values do not open the signed commitment")
            self._abort(IncidentKind.BINDING_VIOLATION, (msg.sender,),
                        "commitment opening failed")
            return False
        self.reveals[msg.sender] = msg
        if set(self.reveals) == set(self.roster):
            self.outcome = self._compute_outcome()
            self.phase = Phase.COMPLETE
        return True

    def _compute_outcome(self) -> tuple[Outcome, ...]:
        results = []
        for i, spec in enumerate(self.draws.draws):
            shares = [self.reveals[fp].shares[i] for fp in self.roster]
            d = compute_result(shares, spec.eligible.index_space)
            results.append(Outcome(spec.did, d, candidate_at(spec.eligible, d)))
        return tuple(results)

    def session_outcome(self) -> tuple[Outcome, ...]:
        if self.phase is not Phase.COMPLETE or self.outcome is None:
            raise StateError(f"no outcome in phase {self.phase.value}")
        return self.outcome

    def missing(self) -> tuple[bytes, ...]:
        """Stakeholders the current phase is still waiting on."""
        if self.phase is Phase.COMMITTING:
            pending = set(self.roster) - set(self.commits)
        elif self.phase is Phase.REVEALING:
            pending = set(self.roster) - set(self.reveals)
        else:
            pending = set()
        return tuple(sorted(pending))

    def handle_timeout(self) -> tuple[bytes, ...]:
        """Abort naming the non-compliant stakeholders; no-op when none."""
        if self.phase not in (Phase.COMMITTING, Phase.REVEALING):
            raise StateError(f"no deadline applies in phase {self.phase.value}")
        culprits = self.missing()
        if not culprits:
            return ()
        self._log(IncidentKind.TIMEOUT, None,
                  "deadline elapsed in phase " + self.phase.value)
        self._abort(IncidentKind.TIMEOUT, culprits,
                    f"no message from {len(culprits)} stakeholder(s) before the deadline")
        return culprits


def start_session(
    spec: DrawSpec | DrawList,
    self_id: StakeholderId,
    sk,
    public_keys: dict[bytes, bytes],
) -> tuple[Session, CommitMessage, Opening]:
    """Create a participant session with its own commitment already recorded."""
    session = Session(spec, public_keys, self_id=self_id)
    session.begin()
    msg, opening = session.make_commit(sk)
    session.receive_commit(msg)
    return session, msg, opening
