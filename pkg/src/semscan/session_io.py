"""File formats: head-pose traces, scenes, gaze histories, turn records.

Traces and turn records are line-oriented (one JSON object per line) so
they stream, diff, and append safely during live capture; scene files are
single JSON documents.  Every format carries a `format_version`; unknown
versions are rejected.  Loads never mutate files and all warnings are
returned as machine-readable dicts.

Coordinate convention (documented in headers): right-handed, +Z up,
meters; timestamps in milliseconds.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

from .agent import AgentTurn
from .errors import InputError, ParseError
from .evaluation import RecordGrid, TurnRecord
from .geometry import UNIT_NORM_TOLERANCE, Aabb, HeadPoseSample, Scene, SceneObject, Vec3
from .scanpath import SemanticScanpath, Utterance, compose
from .segmentation import FixationSegment, GazeHistory

FORMAT_VERSION = 1
COORDINATE_FRAME = "right-handed, +Z up, meters"
FORWARD_NORM_WARN_TOLERANCE = 1e-4


def _check_version(header: dict, path: str) -> None:
    version = header.get("format_version")
    if version != FORMAT_VERSION:
        raise InputError(
            f"{path}: unsupported format_version {version!r} (this build reads {FORMAT_VERSION})"
        )


# ---------------------------------------------------------------------------
# head-pose traces
# ---------------------------------------------------------------------------

@dataclass
class TraceFile:
    samples: list[HeadPoseSample]
    frame_rate_hint_hz: float | None = None
    coordinate_frame: str = COORDINATE_FRAME
    warnings: list[dict] = field(default_factory=list)


def save_trace(path: str | Path, trace: TraceFile) -> None:
    header = {
        "format_version": FORMAT_VERSION,
        "kind": "head_pose_trace",
        "units": "milliseconds, meters",
        "coordinate_frame": trace.coordinate_frame,
    }
    if trace.frame_rate_hint_hz is not None:
        header["frame_rate_hint_hz"] = trace.frame_rate_hint_hz
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header) + "\n")
        for s in trace.samples:
            fh.write(
                json.dumps(
                    {
                        "t_ms": s.timestamp_ms,
                        "origin": [s.origin.x, s.origin.y, s.origin.z],
                        "forward": [s.forward.x, s.forward.y, s.forward.z],
                    }
                )
                + "\n"
            )


def load_trace(path: str | Path) -> TraceFile:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise InputError(f"{path}: empty trace file (missing header)")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: bad header JSON: {exc.msg}", line=1) from exc
    if header.get("kind") != "head_pose_trace":
        raise InputError(f"{path}: not a head-pose trace (kind={header.get('kind')!r})")
    _check_version(header, str(path))

    samples: list[HeadPoseSample] = []
    warnings: list[dict] = []
    last_t: float | None = None
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        try:
            rec = json.loads(raw)
            t = float(rec["t_ms"])
            origin = Vec3(*(float(v) for v in rec["origin"]))
            fx, fy, fz = (float(v) for v in rec["forward"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{path}: malformed sample: {exc}", line=lineno) from exc
        if last_t is not None and t <= last_t:
            raise InputError(
                f"{path}:{lineno}: non-monotone timestamp {t} after {last_t}"
            )
        last_t = t
        norm = math.sqrt(fx * fx + fy * fy + fz * fz)
        if norm == 0.0 or not math.isfinite(norm):
            raise InputError(f"{path}:{lineno}: forward vector has invalid norm {norm}")
        if abs(norm - 1.0) > UNIT_NORM_TOLERANCE:
            # renormalize; already-unit vectors stay bit-identical
            if abs(norm - 1.0) > FORWARD_NORM_WARN_TOLERANCE:
                warnings.append(
                    {"code": "renormalized_forward", "line": lineno, "norm": norm}
                )
            fx, fy, fz = fx / norm, fy / norm, fz / norm
        samples.append(
            HeadPoseSample(timestamp_ms=t, origin=origin, forward=Vec3(fx, fy, fz))
        )
    return TraceFile(
        samples=samples,
        frame_rate_hint_hz=header.get("frame_rate_hint_hz"),
        coordinate_frame=header.get("coordinate_frame", COORDINATE_FRAME),
        warnings=warnings,
    )


# ---------------------------------------------------------------------------
# scenes
# ---------------------------------------------------------------------------

@dataclass
class SceneFile:
    scene: Scene
    contents: dict[str, list[str]]


def save_scene(path: str | Path, scene: Scene, contents: dict[str, list[str]] | None = None) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": "scene",
        "coordinate_frame": COORDINATE_FRAME,
        "objects": [
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
        ],
    }
    if contents:
        doc["contents"] = {k: list(v) for k, v in contents.items()}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_scene_file(path: str | Path) -> SceneFile:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: bad scene JSON: {exc.msg}", line=exc.lineno, column=exc.colno) from exc
    if doc.get("kind") != "scene":
        raise InputError(f"{path}: not a scene file (kind={doc.get('kind')!r})")
    _check_version(doc, str(path))
    objects = []
    for entry in doc.get("objects", []):
        try:
            aabb = Aabb(
                min=Vec3(*(float(v) for v in entry["aabb"]["min"])),
                max=Vec3(*(float(v) for v in entry["aabb"]["max"])),
            )
            objects.append(
                SceneObject(
                    id=entry["id"],
                    label=entry.get("label", entry["id"]),
                    kind=entry.get("kind", "object"),
                    aabb=aabb,
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{path}: malformed scene object {entry!r}: {exc}") from exc
    try:
        scene = Scene(objects=tuple(objects))
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from exc
    contents = {k: list(v) for k, v in doc.get("contents", {}).items()}
    return SceneFile(scene=scene, contents=contents)


def load_scene(path: str | Path) -> Scene:
    return load_scene_file(path).scene


# ---------------------------------------------------------------------------
# gaze histories
# ---------------------------------------------------------------------------

def history_to_dict(history: GazeHistory) -> dict:
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


def history_from_dict(data: dict) -> GazeHistory:
    return GazeHistory(
        window_start_ms=float(data["window"][0]),
        window_end_ms=float(data["window"][1]),
        segments=tuple(
            FixationSegment(
                object_ids=tuple(s["object_ids"]),
                start_ms=float(s["start_ms"]),
                duration_ms=float(s["duration_ms"]),
            )
            for s in data["segments"]
        ),
    )


def save_history(path: str | Path, history: GazeHistory) -> None:
    doc = {"format_version": FORMAT_VERSION, "kind": "gaze_history"}
    doc.update(history_to_dict(history))
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_history(path: str | Path) -> GazeHistory:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("kind") != "gaze_history":
        raise InputError(f"{path}: not a gaze history file (kind={doc.get('kind')!r})")
    _check_version(doc, str(path))
    return history_from_dict(doc)


# ---------------------------------------------------------------------------
# turn records
# ---------------------------------------------------------------------------

def utterance_to_dict(utterance: Utterance) -> dict:
    return {
        "text": utterance.text,
        "turn_window": list(utterance.turn_window),
        "words": [list(w) for w in utterance.words] if utterance.words is not None else None,
    }


def utterance_from_dict(data: dict) -> Utterance:
    words = data.get("words")
    return Utterance(
        text=data["text"],
        turn_window=(float(data["turn_window"][0]), float(data["turn_window"][1])),
        words=tuple((w[0], float(w[1]), float(w[2])) for w in words) if words is not None else None,
    )


def turn_record_to_dict(record: TurnRecord) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "turn_record",
        "user_id": record.user_id,
        "scenario_id": record.scenario_id,
        "task_id": record.task_id,
        "utterance": utterance_to_dict(record.scanpath.utterance),
        "gaze_history": history_to_dict(record.scanpath.gaze_history),
        "agent_turn": record.agent_turn.to_dict() if record.agent_turn else None,
    }


def turn_record_from_dict(data: dict, path: str = "<memory>") -> TurnRecord:
    if data.get("kind") != "turn_record":
        raise InputError(f"{path}: not a turn record (kind={data.get('kind')!r})")
    _check_version(data, path)
    utterance = utterance_from_dict(data["utterance"])
    history = history_from_dict(data["gaze_history"])
    agent_turn = AgentTurn.from_dict(data["agent_turn"]) if data.get("agent_turn") else None
    return TurnRecord(
        user_id=data["user_id"],
        scenario_id=data["scenario_id"],
        task_id=data["task_id"],
        scanpath=compose(utterance, history),
        agent_turn=agent_turn,
    )


def save_turn_records(path: str | Path, records: list[TurnRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(turn_record_to_dict(record)) + "\n")


def load_turn_records(directory: str | Path) -> RecordGrid:
    """Read every *.jsonl/*.ndjson file in `directory` into a record grid."""
    grid = RecordGrid()
    directory = Path(directory)
    if not directory.is_dir():
        raise InputError(f"{directory}: not a directory")
    for name in sorted(os.listdir(directory)):
        if not name.endswith((".jsonl", ".ndjson")):
            continue
        file_path = directory / name
        with open(file_path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                if not raw.strip():
                    continue
                try:
                    data = json.loads(raw)
                except json.JSONDecodeError as exc:
                    raise ParseError(f"{file_path}: bad record JSON: {exc.msg}", line=lineno) from exc
                grid.add(turn_record_from_dict(data, path=f"{file_path}:{lineno}"))
    return grid


# ---------------------------------------------------------------------------
# orientation ingestion helpers
# ---------------------------------------------------------------------------

def forward_from_quaternion(
    w: float, x: float, y: float, z: float, base: tuple[float, float, float] = (1.0, 0.0, 0.0)
) -> Vec3:
    """Rotate the base forward axis (+X by default) by a unit quaternion."""
    n = math.sqrt(w * w + x * x + y * y + z * z)
    if n == 0.0:
        raise InputError("zero quaternion")
    w, x, y, z = w / n, x / n, y / n, z / n
    bx, by, bz = base
    # standard quaternion-vector rotation q * v * q^-1
    fx = (1 - 2 * (y * y + z * z)) * bx + 2 * (x * y - w * z) * by + 2 * (x * z + w * y) * bz
    fy = 2 * (x * y + w * z) * bx + (1 - 2 * (x * x + z * z)) * by + 2 * (y * z - w * x) * bz
    fz = 2 * (x * z - w * y) * bx + 2 * (y * z + w * x) * by + (1 - 2 * (x * x + y * y)) * bz
    return Vec3(fx, fy, fz).normalized()


def forward_from_yaw_pitch(yaw_deg: float, pitch_deg: float) -> Vec3:
    """Yaw about +Z from the +X axis, pitch positive upward."""
    yaw = math.radians(yaw_deg)
    pitch = math.radians(pitch_deg)
    return Vec3(
        math.cos(pitch) * math.cos(yaw),
        math.cos(pitch) * math.sin(yaw),
        math.sin(pitch),
    )


def scanpath_to_dict(sp: SemanticScanpath) -> dict:
    return {
        "utterance": utterance_to_dict(sp.utterance),
        "gaze_history": history_to_dict(sp.gaze_history),
    }


def scanpath_from_dict(data: dict) -> SemanticScanpath:
    return compose(
        utterance_from_dict(data["utterance"]), history_from_dict(data["gaze_history"])
    )
