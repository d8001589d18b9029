"""Local HTTP service for the workbench: a thin adapter over the modules.

Every endpoint is a direct composition of library calls - the service adds
transport, JSON shapes, and an in-memory session registry (sessions expire
after 30 idle minutes), nothing else. Responses are JSON; errors are
`{"code", "message"}` with a matching HTTP status. Binds localhost only.

    GET  /api/model?rev=N            model as the interchange document
    POST /api/check                  {"rev"?} or {"source", "source_name"?}
    POST /api/sessions               {"root", "rev"?, "source"?, limits...}
    POST /api/sessions/{id}/input    {"line"}
    GET  /api/sessions/{id}          full session state
    GET  /api/events?from=N&follow=  server-sent event lines
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse

from .checker import check_all
from .errors import PictoforgeError, SessionError
from .model import DesignModel
from .parser import ParseFailure, parse
from .prototyper import Limits, Session, TranscriptEvent, session_input, session_start
from .repository import RepoStore

DEFAULT_PORT = 7468
SESSION_TTL_SECONDS = 30 * 60


@dataclass
class WorkbenchConfig:
    repo_root: Path
    listen_port: int = DEFAULT_PORT
    max_steps: int | None = None
    max_depth: int | None = None
    ui_dir: Path | None = None

    def __post_init__(self):
        if not (1024 <= self.listen_port <= 65535):
            raise ValueError(f"listen_port {self.listen_port} outside [1024, 65535]")

    def limits(self) -> Limits:
        limits = Limits()
        if self.max_steps is not None:
            limits.max_steps = self.max_steps
        if self.max_depth is not None:
            limits.max_depth = self.max_depth
        return limits


@dataclass
class _Held:
    session: Session
    root: str
    lock: threading.Lock = field(default_factory=threading.Lock)
    last_used: float = 0.0


class SessionRegistry:
    """In-memory session table with idle expiry, safe for concurrent requests."""

    def __init__(self, ttl: float = SESSION_TTL_SECONDS, clock=time.monotonic):
        self._ttl = ttl
        self._clock = clock
        self._held: dict[str, _Held] = {}
        self._guard = threading.Lock()

    def _purge(self) -> None:
        now = self._clock()
        for sid in [s for s, h in self._held.items() if now - h.last_used > self._ttl]:
            del self._held[sid]

    def add(self, session: Session, root: str) -> str:
        with self._guard:
            self._purge()
            held = _Held(session=session, root=root, last_used=self._clock())
            self._held[session.session_id] = held
            return session.session_id

    def get(self, session_id: str) -> _Held:
        with self._guard:
            self._purge()
            held = self._held.get(session_id)
            if held is None:
                raise SessionError("NO_SUCH_SESSION", f"no session '{session_id}'")
            held.last_used = self._clock()
            return held


_STATUS_BY_CODE = {
    "NO_SUCH_REVISION": 404,
    "NO_SUCH_SESSION": 404,
    "NO_SUCH_DIAGRAM": 404,
    "SCHEMA_NOT_FOUND": 404,
    "SESSION_NOT_RUNNING": 409,
    "BUSY": 409,
    "NOT_LOCKED": 409,
    "MODEL_HAS_ERRORS": 422,
    "PARSE_FAILED": 422,
    "BAD_REQUEST": 400,
}


def _error(code: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=_STATUS_BY_CODE.get(code, 500), content={"code": code, "message": message}
    )


def event_dict(ev: TranscriptEvent) -> dict:
    return {"kind": ev.kind, "text": ev.text, "node": ev.node, "step": ev.step, "detail": ev.detail}


def finding_dict(f) -> dict:
    return {
        "code": f.code,
        "severity": f.severity.value,
        "subject_kind": f.subject_kind,
        "subject_name": f.subject_name,
        "detail": f.detail,
        "line": f.line(),
    }


def session_state(held: _Held) -> dict:
    s = held.session
    return {
        "id": s.session_id,
        "root": held.root,
        "status": s.status,
        "current_diagram": s.current_diagram,
        "current_node": s.current,
        "bindings": dict(s.bindings),
        "step_count": s.step_count,
        "transcript": [event_dict(ev) for ev in s.transcript],
    }


def create_app(config: WorkbenchConfig) -> FastAPI:
    app = FastAPI(title="pictoforge workbench", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    store = RepoStore(config.repo_root)
    registry = SessionRegistry()
    app.state.registry = registry
    app.state.store = store

    @app.exception_handler(PictoforgeError)
    async def _tool_error(_request: Request, exc: PictoforgeError):
        return _error(exc.code, exc.message)

    def _model_from(body: dict) -> DesignModel:
        source = body.get("source")
        if source is not None:
            try:
                return parse(source, body.get("source_name", "<posted>"))
            except ParseFailure as e:
                raise PictoforgeError("PARSE_FAILED", "; ".join(str(err) for err in e.errors))
        rev = body.get("rev")
        if rev is None:
            rev = store.current_revision
        return store.checkout(int(rev))

    @app.get("/api/model")
    def get_model(rev: int | None = None):
        number = store.current_revision if rev is None else rev
        return json.loads(store.export(number))

    @app.post("/api/check")
    async def post_check(request: Request):
        body = await request.json() if await request.body() else {}
        model = _model_from(body if isinstance(body, dict) else {})
        return {"findings": [finding_dict(f) for f in check_all(model)]}

    @app.post("/api/sessions")
    async def post_sessions(request: Request):
        body = await request.json()
        if not isinstance(body, dict) or "root" not in body:
            return _error("BAD_REQUEST", "body must be a JSON object with a 'root' diagram name")
        model = _model_from(body)
        limits = config.limits()
        if "max_steps" in body:
            limits.max_steps = int(body["max_steps"])
        if "max_depth" in body:
            limits.max_depth = int(body["max_depth"])
        session = session_start(model, body["root"], limits)
        registry.add(session, body["root"])
        return {
            "id": session.session_id,
            "status": session.status,
            "events": [event_dict(ev) for ev in session.transcript],
        }

    @app.post("/api/sessions/{session_id}/input")
    async def post_input(session_id: str, request: Request):
        body = await request.json()
        if not isinstance(body, dict) or "line" not in body:
            return _error("BAD_REQUEST", "body must be a JSON object with a 'line'")
        held = registry.get(session_id)
        with held.lock:
            before = len(held.session.transcript)
            session_input(held.session, str(body["line"]))
            new_events = held.session.transcript[before:]
            return {
                "status": held.session.status,
                "events": [event_dict(ev) for ev in new_events],
            }

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str):
        held = registry.get(session_id)
        with held.lock:
            return session_state(held)

    @app.get("/api/events")
    def get_events(request: Request, from_seq: int = Query(1, alias="from"), follow: int = 1):
        log = store.event_log

        def stream():
            for event in log.tail(from_seq, follow=bool(follow)):
                yield f"data: {event.line()}\n\n"

        return StreamingResponse(stream(), media_type="text/event-stream")

    if config.ui_dir is not None and Path(config.ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app


def serve(config: WorkbenchConfig) -> None:
    """Run the workbench service until interrupted (localhost only)."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host="127.0.0.1", port=config.listen_port, log_level="warning")
