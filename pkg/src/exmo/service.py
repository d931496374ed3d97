"""Session-oriented JSON-over-HTTP facade.

A session is created from named artifacts (bundled or uploaded), runs the
full pipeline once (extraction, purpose slice, profile tailoring,
annotation) and then serves events, explanations, feedback, per-stage
model exports and lookahead queries.  Requests touching the same session
are serialized; distinct sessions proceed independently.
"""
from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any
import warnings as _warnings

from fastapi import Body, FastAPI, Request
from fastapi.responses import JSONResponse

from . import bundles
from .annotation import AnnotationBase, annotate
from .emodel import STAGES, ExplanationModel
from .errors import (ExmoError, HiddenForExplainee, NotObserved,
                     NothingMoreToReveal, NovelSituationFrozen,
                     TimestampRegression, TraceFormatError, UnknownNode)
from .extraction import ExtractionConfig, extract_em1
from .model import parse_model
from .runtime import AnalyseConfig, Event, Session, new_session, parse_trace
from .slicing import (ExplaineeProfile, ExplanationPurpose,
                      ObservableSelector, slice_by_profile, slice_by_purpose,
                      visible_view)

ARTIFACT_KINDS = ("model", "purpose", "profile", "annotations", "trace")


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _json_text(content: Any) -> str:
    import json
    if isinstance(content, str):
        return content
    return json.dumps(content)


def _trace_text(content: Any) -> str:
    import json
    if isinstance(content, str):
        return content
    if isinstance(content, list):
        return "\n".join(json.dumps(e) for e in content) + "\n"
    raise ApiError(400, "bad_artifact", "trace content must be JSONL or a list")


_VALIDATORS = {
    "model": parse_model,
    "purpose": ExplanationPurpose.loads,
    "profile": ExplaineeProfile.loads,
    "annotations": AnnotationBase.loads,
    "trace": parse_trace,
}


class ArtifactStore:
    """Named artifacts: read-only bundled set plus in-memory uploads."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._bundled: dict[str, dict[str, str]] = {
            kind: {name: bundles.bundled_text(kind, name) for name in names}
            for kind, names in bundles.bundled_names().items()}
        self._uploads: dict[str, dict[str, str]] = {k: {} for k in ARTIFACT_KINDS}

    def text(self, kind: str, name: str) -> str:
        if kind not in ARTIFACT_KINDS:
            raise ApiError(400, "bad_artifact", f"unknown artifact kind {kind!r}")
        with self._lock:
            if name in self._uploads[kind]:
                return self._uploads[kind][name]
            if name in self._bundled.get(kind, {}):
                return self._bundled[kind][name]
        raise ApiError(404, "unknown_artifact", f"no {kind} named {name!r}")

    def put(self, kind: str, name: str, content: Any) -> None:
        if kind not in ARTIFACT_KINDS:
            raise ApiError(400, "bad_artifact", f"unknown artifact kind {kind!r}")
        if not isinstance(name, str) or not name:
            raise ApiError(400, "bad_artifact", "artifact name must be a string")
        text = _trace_text(content) if kind == "trace" else _json_text(content)
        try:
            _VALIDATORS[kind](text)
        except ApiError:
            raise
        except Exception as exc:
            raise ApiError(400, "bad_artifact", f"invalid {kind}: {exc}") from exc
        with self._lock:
            if name in self._bundled.get(kind, {}):
                raise ApiError(409, "artifact_exists",
                               f"bundled {kind} {name!r} is read-only")
            self._uploads[kind][name] = text

    def listing(self) -> dict[str, list[str]]:
        with self._lock:
            return {kind: sorted(set(self._bundled.get(kind, {}))
                                 | set(self._uploads[kind]))
                    for kind in ARTIFACT_KINDS}


@dataclass
class SessionEntry:
    id: str
    created_at: str
    explainee: str
    session: Session
    stages: dict[str, ExplanationModel]
    warnings: list[str] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)


def _require(payload: Any, key: str) -> Any:
    if not isinstance(payload, dict) or key not in payload:
        raise ApiError(400, "bad_request", f"missing field {key!r}")
    return payload[key]


def _build_session(store: ArtifactStore,
                   payload: dict[str, Any]) -> SessionEntry:
    model_name = _require(payload, "model")
    ta = parse_model(store.text("model", model_name))
    if payload.get("purpose") is not None:
        purpose = ExplanationPurpose.loads(store.text("purpose", payload["purpose"]))
    else:
        purpose = ExplanationPurpose("all", (ObservableSelector("*"),))
    if payload.get("profile") is not None:
        profile = ExplaineeProfile.loads(store.text("profile", payload["profile"]))
    else:
        profile = ExplaineeProfile("default")
    if payload.get("annotations") is not None:
        base = AnnotationBase.loads(store.text("annotations", payload["annotations"]))
    else:
        base = AnnotationBase()
    if payload.get("analyse") is not None:
        analyse = AnalyseConfig.from_dict(payload["analyse"])
    else:
        # Bundled-scenario default: aborted manoeuvres need explaining.
        analyse = AnalyseConfig(triggers=(ObservableSelector("abort"),))
    options = payload.get("options") or {}
    config = ExtractionConfig(
        include_clock_resets=bool(options.get("include_clock_resets", False)),
        chain_depth=int(options.get("chain_depth", 1)))
    try:
        with _warnings.catch_warnings(record=True) as caught:
            _warnings.simplefilter("always")
            em1 = extract_em1(ta, config)
            em2 = slice_by_purpose(em1, purpose)
            em3 = slice_by_profile(em2, profile)
            em4, _ = annotate(em3, base)
            session = new_session(
                em4, ta, profile, analyse,
                allow_purpose_reveal=bool(options.get("allow_purpose_reveal",
                                                      False)),
                annotation_base=base if base.entries else None)
    except ExmoError as exc:
        raise ApiError(400, "bad_config", str(exc)) from exc
    return SessionEntry(
        id="s-" + uuid.uuid4().hex[:12],
        created_at=datetime.now(timezone.utc).isoformat(),
        explainee=str(payload.get("explainee", profile.id)),
        session=session,
        stages={"EM1": em1, "EM2": em2, "EM3": em3, "EM4": em4},
        warnings=[str(w.message) for w in caught])


def create_app(store: ArtifactStore | None = None) -> FastAPI:
    app = FastAPI(title="explanation service", version="0.1.0")
    artifacts = store if store is not None else ArtifactStore()
    sessions: dict[str, SessionEntry] = {}
    registry_lock = threading.Lock()

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError) -> JSONResponse:
        return JSONResponse(status_code=exc.status,
                            content={"code": exc.code, "message": exc.message})

    def _entry(sid: str) -> SessionEntry:
        with registry_lock:
            entry = sessions.get(sid)
        if entry is None:
            raise ApiError(404, "unknown_session", f"no session {sid!r}")
        return entry

    @app.post("/sessions", status_code=201)
    def create_session(payload: dict[str, Any] = Body(...)) -> dict[str, Any]:
        entry = _build_session(artifacts, payload)
        with registry_lock:
            sessions[entry.id] = entry
        s = entry.session
        return {"id": entry.id, "created_at": entry.created_at,
                "explainee": entry.explainee,
                "time": s.engine.time, "belief": s.engine.belief_dict(),
                "flags": s.flags(), "warnings": entry.warnings}

    @app.post("/sessions/{sid}/events")
    def post_events(sid: str, payload: dict[str, Any] = Body(...)
                    ) -> dict[str, Any]:
        entry = _entry(sid)
        raw = payload.get("events", [])
        if not isinstance(raw, list):
            raise ApiError(400, "bad_request", "'events' must be a list")
        try:
            events = [Event.from_dict(e) for e in raw]
        except TraceFormatError as exc:
            raise ApiError(400, "bad_event", str(exc)) from exc
        with entry.lock:
            session = entry.session
            low = session.engine.time
            for event in events:
                if event.t < low:
                    raise ApiError(409, "timestamp_regression",
                                   f"event at t={event.t} behind t={low}")
                low = event.t
            taken: list[dict[str, Any]] = []
            try:
                for event in events:
                    report = session.step(event)
                    taken.extend(report["taken"])
            except TraceFormatError as exc:
                raise ApiError(400, "bad_event", str(exc)) from exc
            except TimestampRegression as exc:
                raise ApiError(409, "timestamp_regression", str(exc)) from exc
            return {"time": session.engine.time,
                    "belief": session.engine.belief_dict(),
                    "taken": taken, "flags": session.flags(),
                    "explanation_need": session.needs_explanation()}

    @app.get("/sessions/{sid}/explanations")
    def get_explanation(sid: str, observable: str, occurrence: int = 0,
                        verbosity: str | None = None) -> dict[str, Any]:
        if verbosity is not None and verbosity not in ("brief", "detailed"):
            raise ApiError(400, "bad_request",
                           f"verbosity must be brief or detailed, not {verbosity!r}")
        if occurrence < 0:
            raise ApiError(400, "bad_request", "occurrence must be >= 0")
        entry = _entry(sid)
        with entry.lock:
            try:
                path = entry.session.build_explanation(observable, occurrence,
                                                       verbosity)
            except UnknownNode as exc:
                raise ApiError(404, "unknown_node", str(exc)) from exc
            except HiddenForExplainee as exc:
                raise ApiError(403, "hidden_for_explainee", str(exc)) from exc
            except NotObserved as exc:
                raise ApiError(422, "not_observed", str(exc)) from exc
            return path.to_dict()

    @app.post("/sessions/{sid}/feedback")
    def post_feedback(sid: str, payload: dict[str, Any] = Body(...)
                      ) -> dict[str, Any]:
        entry = _entry(sid)
        with entry.lock:
            try:
                return entry.session.apply_feedback(payload)
            except UnknownNode as exc:
                raise ApiError(404, "unknown_node", str(exc)) from exc
            except NothingMoreToReveal as exc:
                raise ApiError(409, "nothing_more_to_reveal", str(exc)) from exc
            except ValueError as exc:
                raise ApiError(400, "bad_request", str(exc)) from exc

    @app.get("/sessions/{sid}/model")
    def get_model(sid: str, stage: str = "EM5") -> dict[str, Any]:
        if stage not in STAGES:
            raise ApiError(400, "bad_request", f"unknown stage {stage!r}")
        entry = _entry(sid)
        with entry.lock:
            session = entry.session
            em = session.em5_view() if stage == "EM5" else entry.stages[stage]
            return {"stage": stage,
                    "model": visible_view(em).to_dict(),
                    "overlay": {
                        "user_hidden": sorted(session.user_hidden),
                        "revealed": sorted(session.revealed),
                        "reveal_depth": {k: session.reveal_depth[k]
                                         for k in sorted(session.reveal_depth)}}}

    @app.get("/sessions/{sid}/lookahead")
    def get_lookahead(sid: str, horizon: int = 10) -> dict[str, Any]:
        if horizon < 0:
            raise ApiError(400, "bad_request", "horizon must be >= 0")
        entry = _entry(sid)
        with entry.lock:
            try:
                results = entry.session.lookahead(horizon)
            except NovelSituationFrozen as exc:
                raise ApiError(409, "novel_situation", str(exc)) from exc
            return {"horizon": horizon, "results": results}

    @app.get("/artifacts")
    def list_artifacts() -> dict[str, list[str]]:
        return artifacts.listing()

    @app.post("/artifacts", status_code=201)
    def upload_artifact(payload: dict[str, Any] = Body(...)) -> dict[str, Any]:
        kind = _require(payload, "kind")
        name = _require(payload, "name")
        artifacts.put(kind, name, _require(payload, "content"))
        return {"kind": kind, "name": name}

    return app
