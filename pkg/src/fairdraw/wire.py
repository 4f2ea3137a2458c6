"""Serialization: JSON forms for the relay API and transcripts, binary MSGv1.

Byte fields travel as base64url text in JSON.  The binary layout (same
length-prefix conventions as ``DRAWv1``) exists so two independent clients
agree on byte identity of a message:

    MSGv1 | 0x01 | u32 n | n x (u32 len | draw id utf-8) | u8 chain
          | u32 len | sender fp | u32 len | digest | u32 len | signature
    MSGv1 | 0x02 | u32 len | sender fp | u32 len | mask | u32 n | n x u64 share
"""

from __future__ import annotations

import base64
import json
import struct
from dataclasses import dataclass, field
from typing import Any

from . import crypto
from .errors import FormatError
from .model import (
    DrawId,
    DrawList,
    DrawSpec,
    StakeholderId,
    parse_draw_id,
)
from .protocol import CommitMessage, Outcome, RevealMessage
from .weights import CandidateId, WeightedEligibleList

TRANSCRIPT_VERSION = "transcriptv1"

_COMMIT_BYTE = b"\x01"
_REVEAL_BYTE = b"\x02"


def b64(data: bytes) -> str:
    return base64.urlsafe_b64encode(data).decode()


def unb64(text: str) -> bytes:
    try:
        return base64.b64decode(text.encode(), altchars=b"-_", validate=True)
    except Exception as exc:
        raise FormatError(f"invalid base64url field: {exc}") from exc


# ---------------------------------------------------------------- specs

def spec_to_json(spec: DrawSpec) -> dict:
    return {
        "did": spec.did.render_lenient(),
        "stakeholders": [
            {"fingerprint": b64(s.fingerprint), "name": s.display_name}
            for s in spec.stakeholders
        ],
        "eligible": [
            {"candidate": c.identifier, "weight": w} for c, w in spec.eligible.entries
        ],
        "info": spec.info,
    }


def spec_from_json(obj: dict) -> DrawSpec:
    try:
        did = parse_draw_id(obj["did"])
        stakeholders = tuple(
            StakeholderId(unb64(s["fingerprint"]), s.get("name", ""))
            for s in obj["stakeholders"]
        )
        entries = tuple(
            (CandidateId(e["candidate"]), int(e["weight"])) for e in obj["eligible"]
        )
        return DrawSpec(
            did=did,
            stakeholders=stakeholders,
            eligible=WeightedEligibleList(entries),
            info=obj.get("info", "") or "",
        )
    except FormatError:
        raise
    except Exception as exc:
        raise FormatError(f"malformed draw spec: {exc}") from exc


def draws_to_json(draws: DrawList) -> list[dict]:
    return [spec_to_json(s) for s in draws.draws]


def draws_from_json(items: list[dict]) -> DrawList:
    return DrawList(tuple(spec_from_json(o) for o in items))


# ------------------------------------------------------------- messages

def message_to_json(msg: CommitMessage | RevealMessage) -> dict:
    if isinstance(msg, CommitMessage):
        return {
            "type": "commit",
            "draw_ids": [d.render_lenient() for d in msg.draw_ids],
            "mode": "chain" if msg.chain else "single",
            "sender": b64(msg.sender),
            "commitment": b64(msg.digest),
            "signature": b64(msg.signature),
        }
    return {
        "type": "reveal",
        "sender": b64(msg.sender),
        "mask": b64(msg.mask),
        "shares": list(msg.shares),
    }


def message_from_json(obj: dict) -> CommitMessage | RevealMessage:
    try:
        kind = obj["type"]
        if kind == "commit":
            return CommitMessage(
                draw_ids=tuple(parse_draw_id(t) for t in obj["draw_ids"]),
                chain=obj["mode"] == "chain",
                sender=unb64(obj["sender"]),
                digest=unb64(obj["commitment"]),
                signature=unb64(obj["signature"]),
            )
        if kind == "reveal":
            return RevealMessage(
                sender=unb64(obj["sender"]),
                mask=unb64(obj["mask"]),
                shares=tuple(int(s) for s in obj["shares"]),
            )
    except FormatError:
        raise
    except Exception as exc:
        raise FormatError(f"malformed protocol message: {exc}") from exc
    raise FormatError(f"unknown message type {obj.get('type')!r}")


def _lp(data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + data


def encode_message(msg: CommitMessage | RevealMessage) -> bytes:
    """Canonical binary form; equal messages have equal bytes."""
    if isinstance(msg, CommitMessage):
        body = [crypto.TAG_MESSAGE, _COMMIT_BYTE, struct.pack(">I", len(msg.draw_ids))]
        body.extend(_lp(d.render_lenient().encode()) for d in msg.draw_ids)
        body.append(b"\x01" if msg.chain else b"\x00")
        body.extend((_lp(msg.sender), _lp(msg.digest), _lp(msg.signature)))
        return b"".join(body)
    body = [crypto.TAG_MESSAGE, _REVEAL_BYTE, _lp(msg.sender), _lp(msg.mask)]
    body.append(struct.pack(">I", len(msg.shares)))
    body.extend(struct.pack(">Q", s) for s in msg.shares)
    return b"".join(body)


# ------------------------------------------------------------ transcript

@dataclass(frozen=True)
class TranscriptEvent:
    timestamp: float
    message: CommitMessage | RevealMessage


@dataclass
class Transcript:
    """The public audit artifact: header, ordered events, claimed outcome."""

    draws: DrawList
    chain: bool
    public_keys: dict[bytes, bytes]  # fingerprint -> raw public key
    events: list[TranscriptEvent] = field(default_factory=list)
    claimed_outcome: list[Outcome] | None = None
    server_view: bool = False
    hash_scheme: str = crypto.HASH_SCHEME
    signature_scheme: str = crypto.SIGNATURE_SCHEME

    def session_draw_ids(self) -> tuple[DrawId, ...]:
        return tuple(s.did for s in self.draws.draws)


def outcome_to_json(outcome: Outcome) -> dict:
    return {
        "draw_id": outcome.draw_id.render_lenient(),
        "d": outcome.result,
        "candidate": outcome.candidate.identifier,
    }


def outcome_from_json(obj: dict) -> Outcome:
    return Outcome(
        draw_id=parse_draw_id(obj["draw_id"]),
        result=int(obj["d"]),
        candidate=CandidateId(obj["candidate"]),
    )


def transcript_to_json(t: Transcript) -> dict:
    return {
        "version": TRANSCRIPT_VERSION,
        "hash": t.hash_scheme,
        "signature_scheme": t.signature_scheme,
        "mode": "chain" if t.chain else "single",
        "draws": draws_to_json(t.draws),
        "public_keys": {b64(fp): b64(pk) for fp, pk in t.public_keys.items()},
        "server_view": t.server_view,
        "events": [
            {"timestamp": e.timestamp, "message": message_to_json(e.message)}
            for e in t.events
        ],
        "claimed_outcome": (
            [outcome_to_json(o) for o in t.claimed_outcome]
            if t.claimed_outcome is not None
            else None
        ),
    }


def transcript_from_json(obj: Any) -> Transcript:
    if not isinstance(obj, dict):
        raise FormatError("transcript must be a JSON object")
    if obj.get("version") != TRANSCRIPT_VERSION:
        raise FormatError(f"unsupported transcript version {obj.get('version')!r}")
    for scheme_key, expected in (("hash", crypto.HASH_SCHEME),
                                 ("signature_scheme", crypto.SIGNATURE_SCHEME)):
        if obj.get(scheme_key) != expected:
            raise FormatError(
                f"unsupported {scheme_key} {obj.get(scheme_key)!r}; this build speaks {expected}"
            )
    try:
        draws = draws_from_json(obj["draws"])
        events = [
            TranscriptEvent(float(e["timestamp"]), message_from_json(e["message"]))
            for e in obj["events"]
        ]
        claimed = obj.get("claimed_outcome")
        return Transcript(
            draws=draws,
            chain=obj["mode"] == "chain",
            public_keys={unb64(k): unb64(v) for k, v in obj["public_keys"].items()},
            events=events,
            claimed_outcome=(
                [outcome_from_json(o) for o in claimed] if claimed is not None else None
            ),
            server_view=bool(obj.get("server_view", False)),
        )
    except FormatError:
        raise
    except Exception as exc:
        raise FormatError(f"malformed transcript: {exc}") from exc


def load_transcript(path) -> Transcript:
    try:
        with open(path, "rb") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not valid JSON: {exc.msg}", offset=exc.pos) from exc
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    return transcript_from_json(obj)


def save_transcript(t: Transcript, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(transcript_to_json(t), fh, indent=2)
        fh.write("\n")
