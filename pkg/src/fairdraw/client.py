"""Stakeholder client: drive one session end-to-end against a relay.

The client never transmits its mask or shares before the local state
machine reaches the reveal phase; that gate lives in Session.make_reveal.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import httpx

from .errors import FairdrawError
from .model import DrawList, DrawSpec, StakeholderId
from .protocol import CommitMessage, Phase, Session, start_session
from .wire import (
    Transcript,
    TranscriptEvent,
    b64,
    draws_to_json,
    message_from_json,
    message_to_json,
)

EXIT_COMPLETE = 0
EXIT_ABORTED = 3
EXIT_NETWORK = 4

DEFAULT_PHASE_TIMEOUT = 600.0  # seconds; the protocol itself has no liveness bound


@dataclass
class ParticipateResult:
    exit_code: int
    session: Session
    transcript: Transcript
    culprits: tuple[bytes, ...] = ()
    error: str | None = None


class RelayClient:
    """Thin HTTP wrapper with bounded retry."""

    def __init__(self, base_url: str, http: httpx.Client | None = None,
                 retries: int = 3, backoff: float = 0.5):
        self._http = http or httpx.Client(base_url=base_url, timeout=10.0)
        self._retries = retries
        self._backoff = backoff

    def close(self):
        self._http.close()

    def _request(self, method: str, url: str, **kw):
        delay = self._backoff
        for attempt in range(self._retries + 1):
            try:
                resp = self._http.request(method, url, **kw)
                resp.raise_for_status()
                return resp.json()
            except httpx.HTTPStatusError:
                raise
            except httpx.HTTPError:
                if attempt == self._retries:
                    raise
                time.sleep(delay)
                delay *= 2

    def create_session(self, draws: DrawList, chain: bool, keys: dict) -> str:
        body = {
            "mode": "chain" if chain else "single",
            "draws": draws_to_json(draws),
            "public_keys": {b64(fp): b64(pk) for fp, pk in keys.items()},
        }
        return self._request("POST", "/sessions", json=body)["session_id"]

    def post_message(self, session_id: str, msg) -> dict:
        return self._request(
            "POST", f"/sessions/{session_id}/messages", json=message_to_json(msg)
        )

    def fetch_log(self, session_id: str, from_index: int):
        obj = self._request(
            "GET", f"/sessions/{session_id}/messages",
            params={"from_index": from_index},
        )
        return obj["messages"], obj["next_index"]

    def fetch_transcript(self, session_id: str) -> dict:
        return self._request("GET", f"/sessions/{session_id}/transcript")


def participate(
    spec: DrawSpec | DrawList,
    self_id: StakeholderId,
    sk,
    public_keys: dict[bytes, bytes],
    relay: RelayClient,
    phase_timeout: float = DEFAULT_PHASE_TIMEOUT,
    poll_interval: float = 0.2,
) -> ParticipateResult:
    """Commit, wait for all commitments, reveal, wait for the outcome."""
    draws = spec if isinstance(spec, DrawList) else DrawList((spec,))
    events: list[TranscriptEvent] = []

    def transcript(session: Session) -> Transcript:
        outcome = list(session.outcome) if session.outcome else None
        return Transcript(
            draws=draws,
            chain=session.chain,
            public_keys=public_keys,
            events=events,
            claimed_outcome=outcome,
            server_view=False,
        )

    try:
        session_id = relay.create_session(draws, isinstance(spec, DrawList), public_keys)
        session, own_commit, opening = start_session(spec, self_id, sk, public_keys)
        relay.post_message(session_id, own_commit)
        cursor = 0
        revealed = False
        deadline = time.monotonic() + phase_timeout
        while session.phase not in (Phase.COMPLETE, Phase.ABORTED):
            messages, cursor = relay.fetch_log(session_id, cursor)
            for entry in messages:
                msg = message_from_json(entry["message"])
                events.append(TranscriptEvent(entry["timestamp"], msg))
                # Re-verify everything locally; the relay is untrusted.
                if isinstance(msg, CommitMessage):
                    if session.phase is Phase.COMMITTING:
                        session.receive_commit(msg)
                    # a commit arriving after the phase closed stays in the
                    # transcript; the auditor classifies it
                elif session.phase in (Phase.COMMITTING, Phase.REVEALING):
                    session.receive_reveal(msg)
                if session.phase is Phase.ABORTED:
                    break
            if session.phase is Phase.REVEALING and not revealed:
                reveal = session.make_reveal(opening)
                relay.post_message(session_id, reveal)
                revealed = True
                deadline = time.monotonic() + phase_timeout
            if session.phase in (Phase.COMPLETE, Phase.ABORTED):
                break
            if time.monotonic() > deadline:
                session.handle_timeout()
                break
            if not messages:
                time.sleep(poll_interval)
    except (httpx.HTTPError, FairdrawError) as exc:
        dummy = Session(spec, public_keys, self_id=self_id)
        return ParticipateResult(
            exit_code=EXIT_NETWORK,
            session=dummy,
            transcript=transcript(dummy),
            error=str(exc),
        )

    if session.phase is Phase.COMPLETE:
        return ParticipateResult(EXIT_COMPLETE, session, transcript(session))
    culprits = session.abort_report.culprits if session.abort_report else ()
    return ParticipateResult(EXIT_ABORTED, session, transcript(session), culprits=culprits)
