"""Local HTTP stepping service consumed by the browser explorer.

Sessions live in memory (LRU-capped); stepping and undo are serialized
per session.  The server binds the loopback interface only.  All
responses are JSON documents; errors carry ``{"error": {code, message}}``.
"""

from __future__ import annotations

import json
import re
import threading
import uuid
from collections import OrderedDict
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional

from .chains import ChainError, reduce_chain
from .export import export_structured, label_to_blocks, to_json_bytes
from .process import Call, Process, ProgramError, format_process, parse_program
from .semantics import (
    DEFAULT_MAX_STATES,
    DEFAULT_MAX_UNFOLD,
    Bounds,
    SymbolicTransition,
    UnguardedRecursion,
    build_lts,
    canonical_state,
    sorted_transitions,
)

SESSION_CAP = 64


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


@dataclass
class Session:
    id: str
    defs: dict
    current: Process
    history: list[tuple[Process, int]] = field(default_factory=list)
    state_ids: dict[str, int] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def state_id(self, term: str) -> int:
        if term not in self.state_ids:
            self.state_ids[term] = len(self.state_ids)
        return self.state_ids[term]

    def transitions(self) -> list[SymbolicTransition]:
        return sorted_transitions(self.current, self.defs, DEFAULT_MAX_UNFOLD)


class SessionStore:
    def __init__(self, cap: int = SESSION_CAP):
        self.cap = cap
        self._sessions: "OrderedDict[str, Session]" = OrderedDict()
        self._lock = threading.Lock()

    def create(self, session: Session) -> None:
        with self._lock:
            self._sessions[session.id] = session
            while len(self._sessions) > self.cap:
                self._sessions.popitem(last=False)

    def get(self, session_id: str) -> Session:
        with self._lock:
            if session_id not in self._sessions:
                raise ApiError(404, "NoSuchSession", f"unknown session {session_id}")
            self._sessions.move_to_end(session_id)
            return self._sessions[session_id]


def _transition_entries(session: Session) -> list[dict]:
    entries = []
    for i, tr in enumerate(session.transitions()):
        target = canonical_state(tr.target, session.defs, DEFAULT_MAX_UNFOLD)
        entries.append(
            {
                "index": i,
                "blocks": label_to_blocks(tr.label),
                "essential": str(reduce_chain(tr.label)),
                "targetPreview": format_process(target),
            }
        )
    return entries


def _state_doc(session: Session) -> dict:
    term = format_process(session.current)
    return {
        "sessionId": session.id,
        "stateId": session.state_id(term),
        "term": term,
        "transitions": _transition_entries(session),
    }


class Api:
    """Transport-independent request handlers (unit-testable directly)."""

    def __init__(self, store: Optional[SessionStore] = None):
        self.store = store or SessionStore()

    def load_program(self, body: dict) -> dict:
        source = body.get("source")
        if not isinstance(source, str):
            raise ApiError(400, "BadRequest", "body must carry a 'source' string")
        try:
            program = parse_program(source)
        except (ProgramError, ChainError) as exc:
            raise ApiError(400, type(exc).__name__, str(exc)) from exc
        entry_name = body.get("main")
        if entry_name in (None, "main"):
            if program.main is None:
                raise ApiError(400, "NoMain", "program has no main process")
            entry = program.main
        elif entry_name in program.defs:
            d = program.defs[entry_name]
            entry = Call(d.name, d.params)
        else:
            raise ApiError(400, "UndefinedConstant", f"no definition named {entry_name}")
        try:
            current = canonical_state(entry, program.defs, DEFAULT_MAX_UNFOLD)
        except UnguardedRecursion as exc:
            raise ApiError(400, "UnguardedRecursion", str(exc)) from exc
        session = Session(id=uuid.uuid4().hex, defs=program.defs, current=current)
        self.store.create(session)
        return _state_doc(session)

    def transitions(self, session_id: str) -> list[dict]:
        session = self.store.get(session_id)
        with session.lock:
            return _transition_entries(session)

    def step(self, session_id: str, body: dict) -> dict:
        session = self.store.get(session_id)
        index = body.get("index")
        with session.lock:
            transitions = session.transitions()
            if not isinstance(index, int) or not 0 <= index < len(transitions):
                raise ApiError(409, "NoSuchTransition", f"no transition with index {index!r}")
            session.history.append((session.current, index))
            session.current = canonical_state(
                transitions[index].target, session.defs, DEFAULT_MAX_UNFOLD
            )
            return _state_doc(session)

    def undo(self, session_id: str) -> dict:
        session = self.store.get(session_id)
        with session.lock:
            if not session.history:
                raise ApiError(409, "NothingToUndo", "the session is at its initial state")
            session.current, _ = session.history.pop()
            return _state_doc(session)

    def lts(self, session_id: str, max_states: int) -> dict:
        session = self.store.get(session_id)
        with session.lock:
            initial = session.history[0][0] if session.history else session.current
            lts = build_lts(
                initial,
                session.defs,
                Bounds(max_states=max_states, max_unfold=DEFAULT_MAX_UNFOLD),
            )
            return export_structured(lts)


_ROUTES = [
    ("POST", re.compile(r"^/api/program$"), "load_program"),
    ("GET", re.compile(r"^/api/session/(?P<sid>[0-9a-f]+)/transitions$"), "transitions"),
    ("POST", re.compile(r"^/api/session/(?P<sid>[0-9a-f]+)/step$"), "step"),
    ("POST", re.compile(r"^/api/session/(?P<sid>[0-9a-f]+)/undo$"), "undo"),
    ("GET", re.compile(r"^/api/session/(?P<sid>[0-9a-f]+)/lts$"), "lts"),
]

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".cna": "text/plain; charset=utf-8",
    ".svg": "image/svg+xml",
}


def make_handler(api: Api, root: Optional[Path]):
    class Handler(BaseHTTPRequestHandler):
        server_version = "cna-serve"

        def log_message(self, fmt, *args):  # quiet by default
            pass

        def _send_json(self, status: int, doc) -> None:
            payload = to_json_bytes(doc) if isinstance(doc, dict) else (
                json.dumps(doc, indent=2) + "\n"
            ).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(payload)))
            self._cors()
            self.end_headers()
            self.wfile.write(payload)

        def _cors(self) -> None:
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")

        def _send_error_doc(self, exc: ApiError) -> None:
            self._send_json(exc.status, {"error": {"code": exc.code, "message": exc.message}})

        def _body(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b"{}"
            try:
                doc = json.loads(raw or b"{}")
            except json.JSONDecodeError as exc:
                raise ApiError(400, "BadRequest", f"invalid JSON body: {exc}") from exc
            if not isinstance(doc, dict):
                raise ApiError(400, "BadRequest", "body must be a JSON object")
            return doc

        def _dispatch(self, method: str) -> None:
            path, _, query = self.path.partition("?")
            try:
                for verb, pattern, name in _ROUTES:
                    if verb != method:
                        continue
                    m = pattern.match(path)
                    if not m:
                        continue
                    sid = m.groupdict().get("sid")
                    if name == "load_program":
                        self._send_json(200, api.load_program(self._body()))
                    elif name == "transitions":
                        self._send_json(200, api.transitions(sid))
                    elif name == "step":
                        self._send_json(200, api.step(sid, self._body()))
                    elif name == "undo":
                        self._send_json(200, api.undo(sid))
                    elif name == "lts":
                        max_states = DEFAULT_MAX_STATES
                        for part in query.split("&"):
                            if part.startswith("max_states="):
                                try:
                                    max_states = int(part.split("=", 1)[1])
                                except ValueError as exc:
                                    raise ApiError(
                                        400, "BadRequest", "max_states must be an integer"
                                    ) from exc
                        self._send_json(200, api.lts(sid, max_states))
                    return
                if method == "GET" and self._serve_static(path):
                    return
                raise ApiError(404, "NotFound", f"no route for {method} {path}")
            except ApiError as exc:
                self._send_error_doc(exc)

        def _serve_static(self, path: str) -> bool:
            if root is None:
                return False
            rel = path.lstrip("/") or "index.html"
            target = (root / rel).resolve()
            try:
                target.relative_to(root.resolve())
            except ValueError:
                return False
            if target.is_dir():
                target = target / "index.html"
            if not target.is_file():
                return False
            payload = target.read_bytes()
            ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
            self.send_response(200)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)
            return True

        def do_GET(self):
            self._dispatch("GET")

        def do_POST(self):
            self._dispatch("POST")

        def do_OPTIONS(self):
            self.send_response(204)
            self._cors()
            self.end_headers()

    return Handler


def make_server(port: int, root: str | None = None, api: Api | None = None) -> ThreadingHTTPServer:
    api = api or Api()
    root_path = Path(root) if root else None
    server = ThreadingHTTPServer(("127.0.0.1", port), make_handler(api, root_path))
    return server


def serve_forever(port: int, root: str | None = None) -> None:
    server = make_server(port, root)
    host, actual_port = server.server_address[:2]
    print(f"serving on http://{host}:{actual_port}/ (ctrl-c to stop)", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
