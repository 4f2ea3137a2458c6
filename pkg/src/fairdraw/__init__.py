"""Auditable multi-party random drawings via commit-and-reveal."""

from .errors import CryptoError, FairdrawError, FormatError, SpecError, StateError
from .model import (
    DrawId,
    DrawList,
    DrawSpec,
    StakeholderId,
    canonical_decode,
    canonical_encode,
    canonical_encode_list,
    parse_draw_id,
    restart_spec,
    validate_draw_list,
    validate_spec,
)
from .protocol import (
    CommitMessage,
    Opening,
    Outcome,
    Phase,
    RevealMessage,
    Session,
    compute_result,
    start_session,
)
from .audit import (
    AuditReport,
    Finding,
    FindingKind,
    Verdict,
    audit_transcript,
    cross_check_relay,
    detect_equivocation,
)
from .wire import Transcript, TranscriptEvent, load_transcript, save_transcript
from .weights import (
    CandidateId,
    WeightedEligibleList,
    candidate_at,
    from_decimal,
    from_fractions,
    materialize,
    uniform_list,
)

__all__ = [
    "AuditReport",
    "CandidateId",
    "CommitMessage",
    "CryptoError",
    "DrawId",
    "DrawList",
    "DrawSpec",
    "FairdrawError",
    "Finding",
    "FindingKind",
    "FormatError",
    "Opening",
    "Outcome",
    "Phase",
    "RevealMessage",
    "Session",
    "SpecError",
    "StakeholderId",
    "StateError",
    "Transcript",
    "TranscriptEvent",
    "Verdict",
    "WeightedEligibleList",
    "audit_transcript",
    "candidate_at",
    "canonical_decode",
    "canonical_encode",
    "canonical_encode_list",
    "compute_result",
    "cross_check_relay",
    "detect_equivocation",
    "from_decimal",
    "from_fractions",
    "load_transcript",
    "materialize",
    "parse_draw_id",
    "restart_spec",
    "save_transcript",
    "start_session",
    "uniform_list",
    "validate_draw_list",
    "validate_spec",
]
