"""HTTP service exposing a coverage set and live steering sessions.

The MOMDP and coverage set are loaded once and shared read-only; every
session owns its mutable state behind a per-session lock, so concurrent
requests against different sessions never contend.
"""
from __future__ import annotations

import threading
import uuid
from pathlib import Path

from fastapi import FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse, Response
from pydantic import BaseModel

from .coverage import CoverageSet, coverage_to_json, load_coverage
from .envs import load_momdp_file
from .errors import ConfigError, FingerprintMismatchError, GuardError, PluralisError
from .momdp import Momdp
from .steering import SteeringSession, jury_from_json
from .welfare import utility_from_json

MAX_STEP_COUNT = 10_000


class SessionCreate(BaseModel):
    jury: dict | None = None
    beta: float = 5.0
    resolution: int = 20
    seed: int = 0


class PreferencesBody(BaseModel):
    weights: list[float] | None = None
    utility_spec: dict | None = None


class FeedbackBody(BaseModel):
    kind: str


class StepBody(BaseModel):
    count: int = 1


def _bad_request(message: str, path: str = "") -> JSONResponse:
    return JSONResponse(status_code=400, content={"error": message, "path": path})


def _not_found(session_id: str) -> JSONResponse:
    return JSONResponse(
        status_code=404, content={"error": f"unknown session {session_id}", "path": ""}
    )


def create_app(momdp: Momdp, cs: CoverageSet) -> FastAPI:
    if cs.momdp_fingerprint != momdp.fingerprint:
        raise FingerprintMismatchError(
            f"coverage set was built for MOMDP {cs.momdp_fingerprint[:12]}..., "
            f"got {momdp.fingerprint[:12]}..."
        )
    app = FastAPI(title="pluralis", docs_url=None, redoc_url=None)
    coverage_doc = coverage_to_json(cs)
    sessions: dict[str, tuple[SteeringSession, threading.Lock]] = {}
    registry_lock = threading.Lock()

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request, exc):
        first = exc.errors()[0] if exc.errors() else {}
        loc = [str(part) for part in first.get("loc", ()) if part != "body"]
        return _bad_request(first.get("msg", "invalid request body"), ".".join(loc))

    def get_session(session_id: str):
        with registry_lock:
            return sessions.get(session_id)

    @app.get("/api/momdp")
    def momdp_summary():
        return {
            "num_states": momdp.num_states,
            "d": momdp.num_objectives,
            "gamma": momdp.gamma,
            "horizon": momdp.horizon,
            "start_state": momdp.start_state,
            "terminal_states": sorted(momdp.terminal_states),
            "objective_labels": list(momdp.objective_labels),
            "fingerprint": momdp.fingerprint,
            "grid": momdp.grid_info,
        }

    @app.get("/api/coverage")
    def coverage():
        return coverage_doc

    @app.post("/api/session")
    def create_session(body: SessionCreate):
        try:
            jury = jury_from_json(body.jury) if body.jury is not None else None
            session = SteeringSession(
                momdp,
                cs,
                beta=body.beta,
                resolution=body.resolution,
                seed=body.seed,
                jury=jury,
            )
        except ConfigError as exc:
            return _bad_request(exc.reason, exc.path)
        except (ValueError, GuardError) as exc:
            return _bad_request(str(exc))
        session_id = uuid.uuid4().hex
        with registry_lock:
            sessions[session_id] = (session, threading.Lock())
        return {
            "session_id": session_id,
            "policy_id": session.selection.policy_id,
            "state": session.state_dict(),
        }

    @app.get("/api/session/{session_id}/state")
    def session_state(session_id: str):
        held = get_session(session_id)
        if held is None:
            return _not_found(session_id)
        session, lock = held
        with lock:
            return session.state_dict()

    @app.post("/api/session/{session_id}/preferences")
    def session_preferences(session_id: str, body: PreferencesBody):
        held = get_session(session_id)
        if held is None:
            return _not_found(session_id)
        session, lock = held
        try:
            spec = (
                utility_from_json(body.utility_spec)
                if body.utility_spec is not None
                else None
            )
            with lock:
                selection = session.set_preferences(
                    weights=body.weights, utility_spec=spec
                )
        except ConfigError as exc:
            return _bad_request(exc.reason, exc.path)
        except (ValueError, PluralisError) as exc:
            return _bad_request(str(exc))
        return {
            "policy_id": selection.policy_id,
            "utility": selection.utility,
            "ranking": [[pid, utility] for pid, utility in selection.ranking],
        }

    @app.post("/api/session/{session_id}/feedback")
    def session_feedback(session_id: str, body: FeedbackBody):
        held = get_session(session_id)
        if held is None:
            return _not_found(session_id)
        session, lock = held
        try:
            with lock:
                return session.feedback(body.kind)
        except ValueError as exc:
            return _bad_request(str(exc), "kind")

    @app.post("/api/session/{session_id}/step")
    def session_step(session_id: str, body: StepBody):
        held = get_session(session_id)
        if held is None:
            return _not_found(session_id)
        if not 1 <= body.count <= MAX_STEP_COUNT:
            return _bad_request(
                f"count {body.count} outside 1..{MAX_STEP_COUNT}", "count"
            )
        session, lock = held
        with lock:
            return session.step(body.count)

    @app.get("/api/session/{session_id}/log")
    def session_log(session_id: str):
        held = get_session(session_id)
        if held is None:
            return _not_found(session_id)
        session, lock = held
        with lock:
            text = session.log_jsonl()
        return PlainTextResponse(text, media_type="application/x-ndjson")

    return app


def build_app(cs_path: str | Path, env_path: str | Path, ui_dir: str | Path | None = None) -> FastAPI:
    """Load artifacts from disk and assemble the app, optionally with a UI mount."""
    momdp = load_momdp_file(env_path)
    cs = load_coverage(cs_path)
    app = create_app(momdp, cs)
    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        ui_dir = Path(ui_dir)
        if not ui_dir.is_dir():
            raise ConfigError(f"UI directory {ui_dir} does not exist", str(ui_dir))
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return app


def serve(
    port: int,
    cs_path: str | Path,
    env_path: str | Path,
    *,
    host: str = "127.0.0.1",
    ui_dir: str | Path | None = None,
) -> None:
    import uvicorn

    app = build_app(cs_path, env_path, ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
