"""Shared generators for randomized tests.

Traces are generated with clean margins around the saccade threshold
(slow jitter well below, jumps well above) so retain/drop decisions never
sit on a float knife edge between implementations.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from semscan.geometry import HeadPoseSample, RankedFrame, Vec3

OBJECT_POOL = ("bowl", "cereal_box", "cup", "milk_bottle", "the_robot")


def random_unit(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def rotate_toward(v: np.ndarray, rng: np.random.Generator, angle_deg: float) -> np.ndarray:
    """Rotate v by angle_deg around a random perpendicular axis."""
    axis = np.cross(v, random_unit(rng))
    norm = np.linalg.norm(axis)
    if norm < 1e-12:
        return v
    axis = axis / norm
    angle = math.radians(angle_deg)
    rotated = v * math.cos(angle) + np.cross(axis, v) * math.sin(angle)
    return rotated / np.linalg.norm(rotated)


def make_random_trace(
    rng: np.random.Generator,
    n_frames: int = 60,
    ids: tuple[str, ...] = OBJECT_POOL,
) -> tuple[list[HeadPoseSample], list[RankedFrame]]:
    """Aligned (poses, frames) with jittery rates, gaps, and saccades.

    Frame angle entries are synthetic (not derived from the poses); the
    segmentation pipeline treats them independently anyway.
    """
    poses: list[HeadPoseSample] = []
    frames: list[RankedFrame] = []
    t = float(rng.uniform(0, 1000))
    forward = random_unit(rng)
    for _ in range(n_frames):
        roll = rng.random()
        if roll < 0.08:
            t += float(rng.uniform(120, 400))  # dropout gap
        else:
            t += float(rng.uniform(20, 45))
        if rng.random() < 0.12:
            forward = rotate_toward(forward, rng, float(rng.uniform(25, 90)))  # saccade
        else:
            forward = rotate_toward(forward, rng, float(rng.uniform(0.0, 1.2)))
        entries = tuple(
            sorted(
                ((oid, float(rng.uniform(0.5, 30.0))) for oid in ids),
                key=lambda e: (e[1], e[0]),
            )
        )
        poses.append(
            HeadPoseSample(
                timestamp_ms=t,
                origin=Vec3(0.0, 0.0, 0.0),
                forward=Vec3(*(float(c) for c in forward)),
            )
        )
        frames.append(RankedFrame(timestamp_ms=t, entries=entries))
    return poses, frames


def poses_to_plain(poses: list[HeadPoseSample]) -> list[tuple]:
    return [
        (p.timestamp_ms, (p.origin.x, p.origin.y, p.origin.z), (p.forward.x, p.forward.y, p.forward.z))
        for p in poses
    ]


def frames_to_plain(frames: list[RankedFrame]) -> list[tuple]:
    return [(f.timestamp_ms, list(f.entries)) for f in frames]


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260809)


def make_clean_record(user_index: int, scenario, task, *, miss_targets: bool = False):
    """A turn record whose gaze dwells dominantly on the task targets.

    With miss_targets the gaze lands on the first distractor instead, so
    the record scores wrong and trips the discard-missed-target filter.
    """
    from semscan.evaluation import TurnRecord
    from semscan.scanpath import SemanticScanpath, Utterance
    from semscan.segmentation import FixationSegment, GazeHistory

    jitter = 7.0 * user_index
    focus = list(task.targets) if not miss_targets else [task.distractors[0]]
    cursor = 0.0
    segments = [FixationSegment(("the_robot",), 0.0, 1000.0 + jitter)]
    cursor = segments[0].end_ms + 80.0
    for i, oid in enumerate(focus):
        seg = FixationSegment((oid,), cursor, 1200.0 - 100.0 * i + jitter)
        segments.append(seg)
        cursor = seg.end_ms + 80.0
    if task.distractors and not miss_targets:
        seg = FixationSegment((task.distractors[0],), cursor, 150.0)
        segments.append(seg)
        cursor = seg.end_ms + 80.0
    history = GazeHistory(0.0, cursor, tuple(segments))
    scanpath = SemanticScanpath(
        utterance=Utterance(text=task.request, turn_window=(0.0, cursor)),
        gaze_history=history,
    )
    return TurnRecord(
        user_id=f"user_{user_index}",
        scenario_id=scenario.id,
        task_id=task.task_id,
        scanpath=scanpath,
    )


def make_synthetic_grid(n_users: int = 7, scenario_ids=("breakfast", "drink")):
    """Full users x scenarios x tasks grid of clean records."""
    from semscan.evaluation import RecordGrid
    from semscan.scenarios import builtin_scenarios

    scenarios = builtin_scenarios()
    grid = RecordGrid()
    for u in range(n_users):
        for sid in scenario_ids:
            scenario = scenarios[sid]
            for task in scenario.tasks:
                grid.add(make_clean_record(u, scenario, task))
    return grid
