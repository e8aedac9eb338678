"""HTTP facade over the session service.

JSON payloads mirror the session-io types; errors come back as
{"error": {"code", "message"}}.  Events stream over SSE with the polling
fallback at /events/poll.
"""

from __future__ import annotations

import json
from typing import Any

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel

from .agent import HeuristicBackend, RemoteChatBackend, ReplayBackend
from .errors import InputError
from .geometry import Aabb, HeadPoseSample, Scene, SceneObject, Vec3
from .scenarios import EvalCondition, builtin_scenario, builtin_scenarios
from .segmentation import SegmentationParams
from .service import ServiceError, SessionManager, history_payload


class PoseBody(BaseModel):
    t_ms: float
    origin: list[float]
    forward: list[float]


class PoseBatchBody(BaseModel):
    samples: list[PoseBody]


class UtteranceBody(BaseModel):
    text: str
    words: list[list[Any]] | None = None
    turn_window: list[float] | None = None


class SceneObjectBody(BaseModel):
    id: str
    label: str | None = None
    kind: str = "object"
    aabb: dict[str, list[float]]


class CreateSessionBody(BaseModel):
    scenario: str | None = None  # builtin scenario name
    scene: list[SceneObjectBody] | None = None
    contents: dict[str, list[str]] | None = None
    params: dict[str, float] | None = None
    scene_query_enabled: bool = True
    actions_enabled: bool = False
    backend: str = "heuristic"
    replay_script: list[dict] | None = None
    turn_lead_ms: float | None = None


def _build_backend(body: CreateSessionBody):
    if body.backend == "heuristic":
        return HeuristicBackend()
    if body.backend == "replay":
        if not body.replay_script:
            raise InputError("replay backend needs a replay_script")
        return ReplayBackend.from_json(body.replay_script)
    if body.backend == "remote":
        return RemoteChatBackend.from_env()
    raise InputError(f"unknown backend {body.backend!r}")


def _build_scene(body: CreateSessionBody) -> tuple[Scene, dict[str, list[str]]]:
    if body.scenario:
        scenario = builtin_scenario(body.scenario)
        return scenario.scene, scenario.contents
    if not body.scene:
        raise InputError("create session needs either a builtin `scenario` or a `scene`")
    objects = tuple(
        SceneObject(
            id=o.id,
            label=o.label or o.id,
            kind=o.kind,
            aabb=Aabb(min=Vec3(*o.aabb["min"]), max=Vec3(*o.aabb["max"])),
        )
        for o in body.scene
    )
    return Scene(objects=objects), body.contents or {}


def _scene_payload(scene: Scene) -> list[dict]:
    return [
        {
            "id": o.id,
            "label": o.label,
            "kind": o.kind,
            "aabb": {
                "min": [o.aabb.min.x, o.aabb.min.y, o.aabb.min.z],
                "max": [o.aabb.max.x, o.aabb.max.y, o.aabb.max.z],
            },
        }
        for o in scene.objects
    ]


def create_app(manager: SessionManager | None = None) -> FastAPI:
    manager = manager or SessionManager()
    app = FastAPI(title="semscan session service")
    app.state.manager = manager
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(ServiceError)
    async def service_error_handler(request: Request, exc: ServiceError):
        return JSONResponse(
            status_code=exc.http_status,
            content={"error": {"code": exc.code, "message": exc.message}},
        )

    @app.exception_handler(InputError)
    async def input_error_handler(request: Request, exc: InputError):
        return JSONResponse(
            status_code=400,
            content={"error": {"code": "invalid_input", "message": str(exc)}},
        )

    @app.get("/scenes")
    def list_scenes():
        return {"scenarios": sorted(builtin_scenarios())}

    @app.get("/scenes/{name}")
    def get_scene(name: str):
        scenario = builtin_scenario(name)
        return {
            "scenario": scenario.id,
            "objects": _scene_payload(scenario.scene),
            "contents": scenario.contents,
            "tasks": [
                {"task_id": t.task_id, "request": t.request, "targets": list(t.targets)}
                for t in scenario.tasks
            ],
        }

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        scene, contents = _build_scene(body)
        if body.contents is not None:
            contents = body.contents
        params = SegmentationParams(**(body.params or {}))
        session_id = manager.create_session(
            scene,
            params,
            EvalCondition(scene_query_enabled=body.scene_query_enabled),
            _build_backend(body),
            actions_enabled=body.actions_enabled,
            initial_contents=contents,
            turn_lead_ms=body.turn_lead_ms if body.turn_lead_ms is not None else 1000.0,
        )
        return {"session_id": session_id}

    @app.get("/sessions/{session_id}")
    def session_info(session_id: str):
        info = manager.get(session_id).info()
        info["scene"] = _scene_payload(manager.get(session_id).scene)
        return info

    @app.post("/sessions/{session_id}/poses")
    def ingest_poses(session_id: str, body: PoseBatchBody):
        session = manager.get(session_id)
        accepted = 0
        last_t = None
        for sample in body.samples:
            ack = session.ingest_pose(
                HeadPoseSample(
                    timestamp_ms=sample.t_ms,
                    origin=Vec3(*sample.origin),
                    forward=Vec3(*sample.forward).normalized(),
                )
            )
            accepted += 1
            last_t = ack["t_ms"]
        return {"accepted": accepted, "last_t_ms": last_t}

    @app.post("/sessions/{session_id}/utterance")
    def submit_utterance(session_id: str, body: UtteranceBody):
        session = manager.get(session_id)
        words = (
            tuple((str(w[0]), float(w[1]), float(w[2])) for w in body.words)
            if body.words is not None
            else None
        )
        window = tuple(body.turn_window) if body.turn_window is not None else None
        turn_id, turn = session.submit_utterance(body.text, words=words, turn_window=window)
        return {
            "turn_id": turn_id,
            "transcript": turn.to_dict(),
            "gaze_history": history_payload(session.turn_histories[turn_id]),
        }

    @app.post("/sessions/{session_id}/cancel")
    def cancel_turn(session_id: str):
        manager.get(session_id).cancel_turn()
        return {"cancelled": True}

    @app.get("/sessions/{session_id}/turns/{turn_id}")
    def get_turn(session_id: str, turn_id: str):
        turn = manager.get(session_id).get_turn(turn_id)
        return {"turn_id": turn_id, "transcript": turn.to_dict()}

    @app.get("/sessions/{session_id}/events/poll")
    def poll_events(session_id: str, from_seq: int = 0, limit: int | None = None):
        events = manager.get(session_id).events_since(from_seq, limit)
        next_seq = events[-1].seq + 1 if events else from_seq
        return {"events": [e.to_dict() for e in events], "next_seq": next_seq}

    @app.get("/sessions/{session_id}/events")
    def stream_events(request: Request, session_id: str, from_seq: int = 0, idle_timeout_s: float = 30.0):
        session = manager.get(session_id)
        # EventSource reconnects carry the last received id; resume after it
        last_id = request.headers.get("last-event-id")
        if last_id is not None:
            from_seq = int(last_id) + 1

        def sse():
            for event in session.subscribe(from_seq, idle_timeout_s=idle_timeout_s):
                yield f"id: {event.seq}\ndata: {json.dumps(event.to_dict())}\n\n"

        return StreamingResponse(sse(), media_type="text/event-stream")

    return app
