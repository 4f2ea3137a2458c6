"""Untrusted relay: an append-only, per-session message board.

The server verifies commit signatures at the door purely as spam rejection;
clients must re-verify everything they fetch, because the relay can omit or
substitute messages (which is exactly what the audit cross-check detects).
"""

from __future__ import annotations

import hashlib
import json
import sqlite3
import threading
import time

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import StreamingResponse

from . import crypto
from .errors import FairdrawError, FormatError, SpecError
from .model import DrawList, canonical_encode_list
from .protocol import CommitMessage, message_payload
from .wire import (
    b64,
    draws_from_json,
    draws_to_json,
    encode_message,
    message_from_json,
    message_to_json,
    Transcript,
    TranscriptEvent,
    transcript_to_json,
    unb64,
)


def session_id_for(draws: DrawList) -> str:
    """Digest of the rendered draw ids; stable across clients."""
    joined = "\n".join(s.did.render_lenient() for s in draws.draws)
    return hashlib.sha256(joined.encode()).hexdigest()


class ConflictError(FairdrawError):
    """A session already exists under this id with a different spec."""


class UnknownSessionError(FairdrawError):
    pass


class RelayStore:
    """Embedded transactional storage; one row per log entry, never mutated."""

    def __init__(self, path: str = ":memory:", allow_fault_injection: bool = False):
        self._conn = sqlite3.connect(path, check_same_thread=False)
        self._conn.execute("PRAGMA journal_mode=WAL")
        self._lock = threading.Lock()
        self._fault_injection = allow_fault_injection
        with self._lock:
            self._conn.executescript(
                """
                CREATE TABLE IF NOT EXISTS sessions (
                    session_id TEXT PRIMARY KEY,
                    body TEXT NOT NULL,
                    created REAL NOT NULL
                );
                CREATE TABLE IF NOT EXISTS messages (
                    session_id TEXT NOT NULL,
                    idx INTEGER NOT NULL,
                    ts REAL NOT NULL,
                    body TEXT NOT NULL,
                    canonical BLOB NOT NULL,
                    PRIMARY KEY (session_id, idx)
                );
                CREATE UNIQUE INDEX IF NOT EXISTS dedup
                    ON messages (session_id, canonical);
                """
            )
            self._conn.commit()

    # -------------------------------------------------------------- sessions

    def create_session(self, draws: DrawList, chain: bool,
                       public_keys: dict[bytes, bytes]) -> str:
        body = json.dumps({
            "mode": "chain" if chain else "single",
            "draws": draws_to_json(draws),
            "public_keys": {b64(fp): b64(pk) for fp, pk in public_keys.items()},
        }, sort_keys=True)
        session_id = session_id_for(draws)
        with self._lock:
            row = self._conn.execute(
                "SELECT body FROM sessions WHERE session_id = ?", (session_id,)
            ).fetchone()
            if row is not None:
                if row[0] != body:
                    raise ConflictError(
                        f"session {session_id[:12]} already exists with a different spec"
                    )
                return session_id
            self._conn.execute(
                "INSERT INTO sessions (session_id, body, created) VALUES (?, ?, ?)",
                (session_id, body, time.time()),
            )
            self._conn.commit()
        return session_id

    def _session(self, session_id: str) -> dict:
        row = self._conn.execute(
            "SELECT body FROM sessions WHERE session_id = ?", (session_id,)
        ).fetchone()
        if row is None:
            raise UnknownSessionError(f"unknown session {session_id!r}")
        return json.loads(row[0])

    def session_context(self, session_id: str):
        """(DrawList, chain flag, public key map) for a stored session."""
        with self._lock:
            body = self._session(session_id)
        draws = draws_from_json(body["draws"])
        keys = {unb64(k): unb64(v) for k, v in body["public_keys"].items()}
        return draws, body["mode"] == "chain", keys

    # -------------------------------------------------------------- messages

    def post_message(self, session_id: str, msg) -> tuple[int, float]:
        """Append; identical messages return the original receipt."""
        draws, chain, keys = self.session_context(session_id)
        if isinstance(msg, CommitMessage):
            pk = keys.get(msg.sender)
            if pk is None:
                raise SpecError("commitment from a sender outside the roster")
            payload = message_payload(canonical_encode_list(draws), msg.digest)
            if not crypto.verify_message(pk, payload, msg.signature):
                raise SpecError("commitment signature does not verify")
        canonical = encode_message(msg)
        body = json.dumps(message_to_json(msg), sort_keys=True)
        with self._lock:
            row = self._conn.execute(
                "SELECT idx, ts FROM messages WHERE session_id = ? AND canonical = ?",
                (session_id, canonical),
            ).fetchone()
            if row is not None:
                return row[0], row[1]
            nxt = self._conn.execute(
                "SELECT COALESCE(MAX(idx) + 1, 0) FROM messages WHERE session_id = ?",
                (session_id,),
            ).fetchone()[0]
            ts = time.time()
            self._conn.execute(
                "INSERT INTO messages (session_id, idx, ts, body, canonical) "
                "VALUES (?, ?, ?, ?, ?)",
                (session_id, nxt, ts, body, canonical),
            )
            self._conn.commit()
        return nxt, ts

    def fetch_log(self, session_id: str, from_index: int = 0):
        """Entries at >= from_index in append order, plus the next index."""
        with self._lock:
            self._session(session_id)
            rows = self._conn.execute(
                "SELECT idx, ts, body FROM messages WHERE session_id = ? AND idx >= ? "
                "ORDER BY idx",
                (session_id, from_index),
            ).fetchall()
            top = self._conn.execute(
                "SELECT COALESCE(MAX(idx) + 1, 0) FROM messages WHERE session_id = ?",
                (session_id,),
            ).fetchone()[0]
        entries = [(idx, ts, json.loads(body)) for idx, ts, body in rows]
        return entries, max(top, from_index)

    def status(self, session_id: str) -> dict:
        """Phase summary derived purely from the log."""
        draws, chain, keys = self.session_context(session_id)
        entries, _ = self.fetch_log(session_id)
        committed, revealed = set(), set()
        for _, _, body in entries:
            msg = message_from_json(body)
            if isinstance(msg, CommitMessage):
                committed.add(msg.sender)
            else:
                revealed.add(msg.sender)
        n = len(keys)
        if len(revealed) >= n:
            phase = "complete"
        elif len(committed) >= n:
            phase = "revealing"
        else:
            phase = "committing"
        return {
            "session_id": session_id,
            "stakeholders": n,
            "commits": len(committed),
            "reveals": len(revealed),
            "phase": phase,
        }

    def export_transcript(self, session_id: str) -> Transcript:
        draws, chain, keys = self.session_context(session_id)
        entries, _ = self.fetch_log(session_id)
        events = [TranscriptEvent(ts, message_from_json(body)) for _, ts, body in entries]
        return Transcript(
            draws=draws,
            chain=chain,
            public_keys=keys,
            events=events,
            claimed_outcome=None,
            server_view=True,
        )

    # ------------------------------------------------- test-only fault hooks

    def _require_faults(self):
        if not self._fault_injection:
            raise FairdrawError("fault injection hooks are disabled")

    def drop_message(self, session_id: str, idx: int) -> None:
        """Simulate a malicious relay omitting one entry (tests only)."""
        self._require_faults()
        with self._lock:
            self._conn.execute(
                "DELETE FROM messages WHERE session_id = ? AND idx = ?",
                (session_id, idx),
            )
            self._conn.commit()

    def substitute_message(self, session_id: str, idx: int, msg) -> None:
        """Simulate a malicious relay swapping one entry (tests only)."""
        self._require_faults()
        body = json.dumps(message_to_json(msg), sort_keys=True)
        with self._lock:
            self._conn.execute(
                "UPDATE messages SET body = ?, canonical = ? "
                "WHERE session_id = ? AND idx = ?",
                (body, encode_message(msg), session_id, idx),
            )
            self._conn.commit()


def create_app(store: RelayStore) -> FastAPI:
    app = FastAPI(title="fairdraw relay")

    def parse_body(obj, what):
        try:
            return what(obj)
        except (FormatError, SpecError, KeyError, TypeError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.post("/sessions")
    async def create_session(request: Request):
        obj = await request.json()

        def build(o):
            draws = draws_from_json(o["draws"])
            keys = {unb64(k): unb64(v) for k, v in o["public_keys"].items()}
            return draws, o.get("mode") == "chain", keys

        draws, chain, keys = parse_body(obj, build)
        try:
            session_id = store.create_session(draws, chain, keys)
        except ConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {"session_id": session_id}

    @app.post("/sessions/{session_id}/messages")
    async def post_message(session_id: str, request: Request):
        obj = await request.json()
        msg = parse_body(obj, message_from_json)
        try:
            idx, ts = store.post_message(session_id, msg)
        except UnknownSessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except SpecError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"index": idx, "timestamp": ts}

    @app.get("/sessions/{session_id}/messages")
    async def fetch_log(session_id: str, from_index: int = 0):
        try:
            entries, nxt = store.fetch_log(session_id, from_index)
        except UnknownSessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return {
            "messages": [
                {"index": idx, "timestamp": ts, "message": body}
                for idx, ts, body in entries
            ],
            "next_index": nxt,
        }

    @app.get("/sessions/{session_id}/status")
    async def status(session_id: str):
        try:
            return store.status(session_id)
        except UnknownSessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.get("/sessions/{session_id}/transcript")
    async def transcript(session_id: str):
        try:
            doc = store.export_transcript(session_id)
        except UnknownSessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return transcript_to_json(doc)

    @app.get("/sessions/{session_id}/events")
    async def events(session_id: str, from_index: int = 0):
        try:
            store.status(session_id)
        except UnknownSessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc))

        import asyncio

        async def stream():
            cursor = from_index
            while True:
                entries, nxt = store.fetch_log(session_id, cursor)
                for idx, ts, _ in entries:
                    yield f"event: message\ndata: {idx}\n\n"
                cursor = nxt
                await asyncio.sleep(0.5)

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app
