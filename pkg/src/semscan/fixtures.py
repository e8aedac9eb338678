"""Deterministic synthetic traces for demos and tests.

A dwell schedule ((object_id | None, duration_ms) pairs) is turned into a
head-pose stream aimed at object centers.  Between dwells the builder
inserts a sample gap long enough that the first frame of the next dwell
stays below the saccade speed threshold; the orientation jump itself then
reads as a tracking dropout rather than a suppressed-and-eaten dwell, so
segment durations come out at their nominal values.
"""

from __future__ import annotations

from dataclasses import dataclass

from .geometry import HeadPoseSample, Scene, Vec3, angle_between_deg
from .scanpath import SemanticScanpath, Utterance, compose
from .scenarios import DEFAULT_HEAD_ORIGIN, Scenario, builtin_scenario
from .segmentation import SegmentationParams, build_gaze_history

DEFAULT_RATE_HZ = 100.0


def aim_at(origin: Vec3, target: Vec3) -> Vec3:
    return Vec3(target.x - origin.x, target.y - origin.y, target.z - origin.z).normalized()


def synthesize_trace(
    scene: Scene,
    schedule: list[tuple[str | None, float]],
    *,
    head_origin: Vec3 = DEFAULT_HEAD_ORIGIN,
    rate_hz: float = DEFAULT_RATE_HZ,
    start_ms: float = 0.0,
    params: SegmentationParams | None = None,
    min_gap_ms: float = 150.0,
) -> list[HeadPoseSample]:
    """Build a pose stream dwelling on each scheduled object in turn.

    A dwell of D ms at rate R contributes D*R/1000 frames spanning D minus
    one frame period, so the segmenter's duration convention reports D.
    `None` entries are silent gaps with no samples.
    """
    params = params or SegmentationParams()
    period_ms = 1000.0 / rate_hz
    samples: list[HeadPoseSample] = []
    t = start_ms
    prev_forward: Vec3 | None = None
    for target_id, duration_ms in schedule:
        if target_id is None:
            t += duration_ms
            prev_forward = None
            continue
        forward = aim_at(head_origin, scene.get(target_id).aabb.center())
        if prev_forward is not None:
            jump_deg = angle_between_deg(prev_forward.as_array(), forward.as_array())
            # gap long enough that jump/gap stays under the saccade threshold
            safe_ms = 1000.0 * jump_deg / params.saccade_speed_threshold_deg_per_s
            t += max(min_gap_ms, safe_ms * 1.05)
        n_frames = max(1, round(duration_ms / period_ms))
        for k in range(n_frames):
            samples.append(
                HeadPoseSample(timestamp_ms=t + k * period_ms, origin=head_origin, forward=forward)
            )
        t += (n_frames - 1) * period_ms + period_ms
        prev_forward = forward
    return samples


def spread_words(text: str, window: tuple[float, float]) -> tuple[tuple[str, float, float], ...]:
    """Evenly spaced word timestamps across a window (synthetic speech)."""
    tokens = text.split()
    if not tokens:
        return ()
    start, end = window
    slot = (end - start) / len(tokens)
    return tuple(
        (tok, start + i * slot, start + (i + 0.9) * slot) for i, tok in enumerate(tokens)
    )


@dataclass(frozen=True)
class DemoFixture:
    scenario: Scenario
    task_id: str
    trace: list[HeadPoseSample]
    utterance: Utterance
    window: tuple[float, float]

    def scanpath(self, params: SegmentationParams | None = None) -> SemanticScanpath:
        params = params or SegmentationParams()
        history = build_gaze_history(self.trace, self.scenario.scene, self.window, params)
        return compose(self.utterance, history)


def demo_schedule(scenario: Scenario, task_id: str) -> list[tuple[str | None, float]]:
    """Fixed gaze choreography for one task: look at the robot, dwell on
    each target (longest first), brush a distractor too briefly to count,
    then glance back at the robot."""
    task = scenario.task(task_id)
    schedule: list[tuple[str | None, float]] = [(scenario.scene.robot.id, 1000.0)]
    for i, target in enumerate(task.targets):
        schedule.append((target, 1200.0 - 100.0 * i))
    if task.distractors:
        schedule.append((task.distractors[0], 150.0))
    schedule.append((scenario.scene.robot.id, 800.0))
    return schedule


def demo_fixture(
    scenario_id: str,
    task_id: str,
    *,
    params: SegmentationParams | None = None,
    rate_hz: float = DEFAULT_RATE_HZ,
) -> DemoFixture:
    scenario = builtin_scenario(scenario_id)
    task = scenario.task(task_id)
    params = params or SegmentationParams()
    trace = synthesize_trace(
        scenario.scene, demo_schedule(scenario, task_id), rate_hz=rate_hz, params=params
    )
    window = (trace[0].timestamp_ms, trace[-1].timestamp_ms + 1000.0 / rate_hz)
    utterance = Utterance(
        text=task.request,
        turn_window=window,
        words=spread_words(task.request, window),
    )
    return DemoFixture(
        scenario=scenario, task_id=task_id, trace=trace, utterance=utterance, window=window
    )
