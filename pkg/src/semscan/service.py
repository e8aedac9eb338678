"""Live session endpoint bridging pose/utterance producers to the
pipeline and agent.

Each session owns a scene, a streaming segmenter for live segment events,
the recorded pose log, and one agent conversation.  Turns are finalized by
the same batch pipeline the offline CLI uses, over the poses inside the
turn window, so a replayed trace produces an identical transcript either
way.  Events are totally ordered per session with contiguous sequence
numbers from 0.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass
from typing import Iterator

from .agent import AgentSession, AgentTurn, Backend, build_tool_registry
from .geometry import HeadPoseSample, Scene, rank_objects
from .scanpath import Utterance, compose
from .scenarios import EvalCondition
from .segmentation import GazeHistory, SegmentationParams, StreamingSegmenter, build_gaze_history


def history_payload(history: GazeHistory) -> dict:
    return {
        "window": [history.window_start_ms, history.window_end_ms],
        "segments": [
            {
                "object_ids": list(s.object_ids),
                "start_ms": s.start_ms,
                "duration_ms": s.duration_ms,
            }
            for s in history.segments
        ],
    }


class ServiceError(Exception):
    """Service-level failure with a machine-readable code."""

    def __init__(self, code: str, message: str, http_status: int = 400):
        super().__init__(message)
        self.code = code
        self.message = message
        self.http_status = http_status


@dataclass(frozen=True)
class SessionEvent:
    seq: int
    kind: str
    payload: dict

    def to_dict(self) -> dict:
        return {"seq": self.seq, "kind": self.kind, "payload": self.payload}


DEFAULT_TURN_LEAD_MS = 1000.0


class Session:
    """One live interaction: single logical consumer of poses/utterances."""

    def __init__(
        self,
        session_id: str,
        scene: Scene,
        params: SegmentationParams,
        condition: EvalCondition,
        backend: Backend,
        *,
        actions_enabled: bool = False,
        initial_contents: dict[str, list[str]] | None = None,
        turn_lead_ms: float = DEFAULT_TURN_LEAD_MS,
    ):
        self.id = session_id
        self.scene = scene
        self.params = params
        self.condition = condition
        self.turn_lead_ms = turn_lead_ms
        self.poses: list[HeadPoseSample] = []
        self.segmenter = StreamingSegmenter(params)
        self.events: list[SessionEvent] = []
        self.turns: dict[str, AgentTurn] = {}
        self.turn_histories: dict[str, GazeHistory] = {}
        self.turn_order: list[str] = []
        self._turn_in_flight = False
        self._lock = threading.RLock()
        self._new_event = threading.Condition(self._lock)
        self.agent = AgentSession(
            scene,
            build_tool_registry(condition, actions_enabled=actions_enabled),
            backend,
            initial_contents=initial_contents,
            on_event=self._emit_agent_event,
        )

    # -- events ------------------------------------------------------------

    def _emit(self, kind: str, payload: dict) -> SessionEvent:
        with self._new_event:
            event = SessionEvent(seq=len(self.events), kind=kind, payload=payload)
            self.events.append(event)
            self._new_event.notify_all()
            return event

    def _emit_agent_event(self, kind: str, payload: dict) -> None:
        self._emit(kind, payload)

    def events_since(self, from_seq: int, limit: int | None = None) -> list[SessionEvent]:
        with self._lock:
            chunk = self.events[max(0, from_seq):]
            return chunk[:limit] if limit is not None else chunk

    def subscribe(
        self,
        from_seq: int = 0,
        poll_timeout_s: float = 0.5,
        idle_timeout_s: float | None = None,
    ) -> Iterator[SessionEvent]:
        """Replay events >= from_seq, then follow live ones.

        At-least-once delivery; consumers dedupe by sequence number.  With
        an idle timeout the stream ends after that long without a new
        event; reconnecting with the next sequence number resumes it
        without gaps.
        """
        cursor = max(0, from_seq)
        idle_s = 0.0
        while True:
            with self._new_event:
                while cursor >= len(self.events):
                    if not self._new_event.wait(timeout=poll_timeout_s):
                        idle_s += poll_timeout_s
                        if idle_timeout_s is not None and idle_s >= idle_timeout_s:
                            return
                batch = self.events[cursor:]
            idle_s = 0.0
            for event in batch:
                yield event
            cursor += len(batch)

    # -- inputs --------------------------------------------------------------

    def ingest_pose(self, sample: HeadPoseSample) -> dict:
        with self._lock:
            if self.poses and sample.timestamp_ms <= self.poses[-1].timestamp_ms:
                raise ServiceError(
                    "stale_timestamp",
                    f"timestamp {sample.timestamp_ms} not after last accepted "
                    f"{self.poses[-1].timestamp_ms}",
                    http_status=409,
                )
            self.poses.append(sample)
            frame = rank_objects(sample, self.scene, self.params.sample_spacing_mm)
            self._emit("pose_accepted", {"t_ms": sample.timestamp_ms})
            self._emit(
                "ranked_frame",
                {
                    "t_ms": frame.timestamp_ms,
                    "entries": [[oid, angle] for oid, angle in frame.entries],
                },
            )
            for seg_event in self.segmenter.feed(sample, frame):
                self._emit(
                    f"segment_{seg_event.kind}",
                    {
                        "object_ids": list(seg_event.object_ids),
                        "start_ms": seg_event.start_ms,
                        **({"end_ms": seg_event.end_ms} if seg_event.end_ms is not None else {}),
                    },
                )
            return {"accepted": True, "t_ms": sample.timestamp_ms}

    def default_window(
        self, words: tuple[tuple[str, float, float], ...] | None
    ) -> tuple[float, float]:
        """[utterance start - lead, submission time]; submission time is the
        last accepted pose timestamp (logical clock, reproducible)."""
        if not self.poses:
            return (0.0, 0.0)
        end = self.poses[-1].timestamp_ms
        start = (words[0][1] - self.turn_lead_ms) if words else self.poses[0].timestamp_ms
        return (start, end)

    def submit_utterance(
        self,
        text: str,
        words: tuple[tuple[str, float, float], ...] | None = None,
        turn_window: tuple[float, float] | None = None,
    ) -> tuple[str, AgentTurn]:
        with self._lock:
            if self._turn_in_flight:
                raise ServiceError(
                    "turn_in_flight", "a turn is already being processed", http_status=409
                )
            self._turn_in_flight = True
            window = turn_window or self.default_window(words)
            turn_id = f"turn_{len(self.turn_order)}"
        try:
            history = build_gaze_history(list(self.poses), self.scene, window, self.params)
            utterance = Utterance(text=text, turn_window=window, words=words)
            sp = compose(utterance, history)
            self._emit(
                "turn_started",
                {"turn_id": turn_id, "window": list(window), "text": text},
            )
            turn = self.agent.run_turn(sp)
            with self._lock:
                self.turns[turn_id] = turn
                self.turn_histories[turn_id] = sp.gaze_history
                self.turn_order.append(turn_id)
            self._emit(
                "turn_completed",
                {
                    "turn_id": turn_id,
                    "status": turn.status,
                    "required_objects": (
                        list(turn.required_objects)
                        if turn.required_objects is not None
                        else None
                    ),
                    "gaze_history": history_payload(sp.gaze_history),
                    "transcript": turn.to_dict(),
                },
            )
            return turn_id, turn
        finally:
            with self._lock:
                self._turn_in_flight = False

    def cancel_turn(self) -> None:
        self.agent.cancel()

    def get_turn(self, turn_id: str) -> AgentTurn:
        with self._lock:
            if turn_id not in self.turns:
                raise ServiceError("turn_not_found", f"no turn {turn_id!r}", http_status=404)
            return self.turns[turn_id]

    def info(self) -> dict:
        with self._lock:
            return {
                "session_id": self.id,
                "condition": self.condition.name,
                "scene_query_enabled": self.condition.scene_query_enabled,
                "object_ids": self.scene.object_ids(),
                "robot_id": self.scene.robot.id,
                "pose_count": len(self.poses),
                "event_count": len(self.events),
                "turn_ids": list(self.turn_order),
                "params": {
                    "angular_threshold_deg": self.params.angular_threshold_deg,
                    "min_fixation_ms": self.params.min_fixation_ms,
                    "sample_spacing_mm": self.params.sample_spacing_mm,
                    "merge_window_ms": self.params.merge_window_ms,
                    "saccade_speed_threshold_deg_per_s": self.params.saccade_speed_threshold_deg_per_s,
                },
            }


class SessionManager:
    """Registry of live sessions; thread-safe."""

    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create_session(
        self,
        scene: Scene,
        params: SegmentationParams,
        condition: EvalCondition,
        backend: Backend,
        *,
        actions_enabled: bool = False,
        initial_contents: dict[str, list[str]] | None = None,
        turn_lead_ms: float = DEFAULT_TURN_LEAD_MS,
    ) -> str:
        session_id = uuid.uuid4().hex
        session = Session(
            session_id,
            scene,
            params,
            condition,
            backend,
            actions_enabled=actions_enabled,
            initial_contents=initial_contents,
            turn_lead_ms=turn_lead_ms,
        )
        with self._lock:
            self._sessions[session_id] = session
        session._emit(
            "session_created",
            {"session_id": session_id, "object_ids": scene.object_ids()},
        )
        return session_id

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise ServiceError("session_not_found", f"no session {session_id!r}", http_status=404)
        return session

    def ids(self) -> list[str]:
        with self._lock:
            return list(self._sessions)
