"""HTTP session API for live conversations.

Endpoints (JSON bodies, normative):

    POST   /v1/sessions                {doc_title?, doc_first_sentence?} -> {session_id}
    POST   /v1/sessions/{id}/ask      {question} -> {answer, passages, cg, mu}
    GET    /v1/sessions/{id}          -> full transcript with per-turn CG snapshots
    DELETE /v1/sessions/{id}          -> {deleted: true}

Sessions live in memory and expire after an idle TTL; asks within one
session are serialized, distinct sessions run concurrently. The server adds
permissive CORS headers so a browser frontend served elsewhere can talk to
it, and can also serve that frontend from --static-dir.
"""

from __future__ import annotations

import json
import logging
import re
import threading
import time
import uuid
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional

from .adapter import AdapterCallError
from .config import AppConfig
from .core import CommonGround, Conversation, DocumentContext
from .pipeline import LiveConversation
from .retrieval import Bm25Index
from .setups import ConfigurationError

logger = logging.getLogger(__name__)

_SESSION_ROUTE = re.compile(r"^/v1/sessions/([^/]+)$")
_ASK_ROUTE = re.compile(r"^/v1/sessions/([^/]+)/ask$")

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json; charset=utf-8",
    ".json": "application/json; charset=utf-8",
    ".svg": "image/svg+xml",
}


class ApiError(Exception):
    def __init__(self, status: int, message: str, **extra) -> None:
        super().__init__(message)
        self.status = status
        self.body = {"error": message, **extra}


def _cg_entries(cg: CommonGround) -> list[dict]:
    return [
        {"origin_turn": p.origin_turn, "status": s.value, "surface": p.surface}
        for p, s in cg.entries()
    ]


@dataclass
class TurnRecord:
    question: str
    answer: str
    cg_full: CommonGround
    cg_selected: CommonGround
    passages: list[dict]
    mu: float


@dataclass
class SessionState:
    session_id: str
    live: LiveConversation
    created_at: float
    last_active: float
    transcript: list[TurnRecord] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def to_view(self) -> dict:
        doc = self.live.session.context.doc
        return {
            "created_at": self.created_at,
            "doc": {"first_sentence": doc.first_sentence, "title": doc.title} if doc else None,
            "last_active": self.last_active,
            "session_id": self.session_id,
            "turns": [
                {
                    "answer": t.answer,
                    "cg_full": _cg_entries(t.cg_full),
                    "cg_selected": _cg_entries(t.cg_selected),
                    "mu": t.mu,
                    "passages": t.passages,
                    "question": t.question,
                }
                for t in self.transcript
            ],
        }


class ServiceApp:
    """Session registry plus the request handlers, independent of the HTTP
    plumbing so tests can drive it directly."""

    def __init__(
        self,
        index: Bm25Index,
        config: AppConfig,
        oracle_conversations: Optional[list[Conversation]] = None,
        session_log: Optional[str | Path] = None,
        static_dir: Optional[str | Path] = None,
    ) -> None:
        self.index = index
        self.config = config
        self.sessions: dict[str, SessionState] = {}
        self._registry_lock = threading.Lock()
        self.oracle_conversations = oracle_conversations or []
        self.session_log = Path(session_log) if session_log else None
        self.static_dir = Path(static_dir) if static_dir else None

    # -- session registry ---------------------------------------------------

    def _purge_expired(self) -> None:
        deadline = time.time() - self.config.session_ttl_seconds
        with self._registry_lock:
            expired = [sid for sid, s in self.sessions.items() if s.last_active < deadline]
            for sid in expired:
                del self.sessions[sid]
        for sid in expired:
            logger.info("expired idle session %s", sid)

    def _get(self, session_id: str) -> SessionState:
        self._purge_expired()
        with self._registry_lock:
            state = self.sessions.get(session_id)
        if state is None:
            raise ApiError(404, "unknown session")
        return state

    def _pick_oracle_conversation(self, doc: Optional[DocumentContext]) -> Optional[Conversation]:
        if self.config.generator != "oracle" and self.config.selector != "oracle":
            return None
        if not self.oracle_conversations:
            raise ApiError(400, "oracle backends need --dataset at startup")
        if doc is not None:
            for conv in self.oracle_conversations:
                if conv.doc == doc:
                    return conv
        return self.oracle_conversations[0]

    # -- handlers -------------------------------------------------------------

    def create_session(self, body: dict) -> dict:
        self._purge_expired()
        doc = None
        title = body.get("doc_title")
        first = body.get("doc_first_sentence")
        if (title is None) != (first is None):
            raise ApiError(
                400, "doc_title and doc_first_sentence must appear together", field="doc_title"
            )
        if title is not None:
            if not isinstance(title, str) or not isinstance(first, str):
                raise ApiError(400, "doc fields must be strings", field="doc_title")
            doc = DocumentContext(title=title, first_sentence=first)
        conversation = self._pick_oracle_conversation(doc)
        try:
            live = LiveConversation.start(self.index, self.config, doc=doc, conversation=conversation)
        except ConfigurationError as exc:
            raise ApiError(400, str(exc))
        session_id = uuid.uuid4().hex
        now = time.time()
        state = SessionState(session_id=session_id, live=live, created_at=now, last_active=now)
        with self._registry_lock:
            self.sessions[session_id] = state
        return {"session_id": session_id}

    def ask(self, session_id: str, body: dict) -> dict:
        state = self._get(session_id)
        question = body.get("question")
        if not isinstance(question, str) or not question.strip():
            raise ApiError(400, "question must be a non-empty string", field="question")
        with state.lock:  # serializes asks within one session
            try:
                result = state.live.ask(question)
            except AdapterCallError as exc:
                raise ApiError(502, f"model backend failed: {exc}")
            except ConfigurationError as exc:
                raise ApiError(400, str(exc))
            passages = [
                {"passage_id": rp.passage.passage_id, "rank": rp.rank, "s_ret_norm": rp.s_ret_norm}
                for rp in result.passages
            ]
            record = TurnRecord(
                question=question,
                answer=result.answer,
                cg_full=result.cg_full,
                cg_selected=result.cg_selected,
                passages=passages,
                mu=result.mu,
            )
            state.transcript.append(record)
            state.last_active = time.time()
            self._log_turn(state, record)
            return {
                "answer": result.answer,
                "cg": {"entries": _cg_entries(result.cg_full)},
                "mu": result.mu,
                "passages": passages,
            }

    def get_session(self, session_id: str) -> dict:
        state = self._get(session_id)
        with state.lock:
            return state.to_view()

    def delete_session(self, session_id: str) -> dict:
        self._get(session_id)
        with self._registry_lock:
            self.sessions.pop(session_id, None)
        return {"deleted": True}

    def _log_turn(self, state: SessionState, record: TurnRecord) -> None:
        if self.session_log is None:
            return
        payload = {
            "answer": record.answer,
            "cg_full": _cg_entries(record.cg_full),
            "cg_selected": _cg_entries(record.cg_selected),
            "question": record.question,
            "session_id": state.session_id,
        }
        with self.session_log.open("a", encoding="utf-8") as handle:
            handle.write(json.dumps(payload, sort_keys=True, ensure_ascii=False) + "\n")


class _Handler(BaseHTTPRequestHandler):
    app: ServiceApp  # assigned by make_server

    def log_message(self, format: str, *args) -> None:
        logger.debug("http: " + format, *args)

    def _send_json(self, status: int, body: dict) -> None:
        payload = json.dumps(body, sort_keys=True, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(payload)))
        self._send_cors()
        self.end_headers()
        self.wfile.write(payload)

    def _send_cors(self) -> None:
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            return {}
        try:
            body = json.loads(raw.decode("utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise ApiError(400, f"malformed JSON body: {exc}")
        if not isinstance(body, dict):
            raise ApiError(400, "body must be a JSON object")
        return body

    def _dispatch(self, method: str) -> None:
        try:
            if method == "POST" and self.path == "/v1/sessions":
                self._send_json(200, self.app.create_session(self._read_body()))
                return
            match = _ASK_ROUTE.match(self.path)
            if method == "POST" and match:
                self._send_json(200, self.app.ask(match.group(1), self._read_body()))
                return
            match = _SESSION_ROUTE.match(self.path)
            if match:
                if method == "GET":
                    self._send_json(200, self.app.get_session(match.group(1)))
                    return
                if method == "DELETE":
                    self._send_json(200, self.app.delete_session(match.group(1)))
                    return
            if method == "GET" and self._serve_static():
                return
            raise ApiError(404, "no such route")
        except ApiError as exc:
            self._send_json(exc.status, exc.body)
        except Exception as exc:  # noqa: BLE001 - last-resort handler
            logger.exception("unhandled service error")
            self._send_json(500, {"error": f"internal error: {exc}"})

    def _serve_static(self) -> bool:
        root = self.app.static_dir
        if root is None:
            return False
        rel = self.path.split("?", 1)[0].lstrip("/") or "index.html"
        target = (root / rel).resolve()
        if not str(target).startswith(str(root.resolve())) or not target.is_file():
            return False
        payload = target.read_bytes()
        self.send_response(200)
        content_type = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(payload)))
        self._send_cors()
        self.end_headers()
        self.wfile.write(payload)
        return True

    def do_GET(self) -> None:  # noqa: N802 - http.server API
        self._dispatch("GET")

    def do_POST(self) -> None:  # noqa: N802
        self._dispatch("POST")

    def do_DELETE(self) -> None:  # noqa: N802
        self._dispatch("DELETE")

    def do_OPTIONS(self) -> None:  # noqa: N802
        self.send_response(204)
        self._send_cors()
        self.end_headers()


def make_server(app: ServiceApp, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (_Handler,), {"app": app})
    return ThreadingHTTPServer((host, port), handler)
