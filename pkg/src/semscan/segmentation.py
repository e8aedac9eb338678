"""Fixation segmentation over ranked candidate frames.

Pipeline: saccade suppression (drop frames during fast head rotation),
run-length formation of frames sharing the same within-threshold candidate
set, minimum-duration filtering, and temporal merging of same-set
neighbours separated by short gaps.

Batch functions are pure; `StreamingSegmenter` is the stateful incremental
equivalent and finalizes to byte-identical output (single owner, not for
concurrent mutation).
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, replace

from .errors import InputError
from .geometry import HeadPoseSample, RankedFrame, Scene, angular_speed, rank_objects


@dataclass(frozen=True)
class SegmentationParams:
    """Gaze-history computation parameters.

    The saccade speed threshold has no published reference value; 120 deg/s
    sits in the usual head-saccade onset range and is configurable.
    """

    angular_threshold_deg: float = 8.0
    min_fixation_ms: float = 100.0
    sample_spacing_mm: float = 5.0
    merge_window_ms: float = 160.0
    saccade_speed_threshold_deg_per_s: float = 120.0

    def __post_init__(self):
        for name in (
            "angular_threshold_deg",
            "min_fixation_ms",
            "sample_spacing_mm",
            "merge_window_ms",
            "saccade_speed_threshold_deg_per_s",
        ):
            if getattr(self, name) <= 0:
                raise InputError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class FixationSegment:
    """Objects fixated over a dwell, ordered by decreasing likelihood."""

    object_ids: tuple[str, ...]
    start_ms: float
    duration_ms: float

    def __post_init__(self):
        if not self.object_ids:
            raise InputError("fixation segment needs at least one object id")
        if len(set(self.object_ids)) != len(self.object_ids):
            raise InputError(f"duplicate ids in fixation segment: {self.object_ids}")

    @property
    def end_ms(self) -> float:
        return self.start_ms + self.duration_ms

    def members(self) -> frozenset[str]:
        return frozenset(self.object_ids)


@dataclass(frozen=True)
class GazeHistory:
    """Time-ordered fixation segments over one turn window.

    Because durations include a trailing nominal frame period, a
    segment's nominal end may overhang the next start (or window_end) by
    up to one period on irregular streams; ordering is by start times.
    """

    window_start_ms: float
    window_end_ms: float
    segments: tuple[FixationSegment, ...] = ()

    def __post_init__(self):
        prev_start = None
        for seg in self.segments:
            if seg.start_ms < self.window_start_ms or seg.start_ms > self.window_end_ms:
                raise InputError(
                    f"segment at {seg.start_ms} outside window "
                    f"[{self.window_start_ms}, {self.window_end_ms}]"
                )
            if prev_start is not None and seg.start_ms < prev_start:
                raise InputError("segments must be sorted by start time")
            prev_start = seg.start_ms

    def total_dwell_ms(self) -> float:
        return sum(s.duration_ms for s in self.segments)


def suppress_saccades(
    frames: list[RankedFrame],
    poses: list[HeadPoseSample],
    params: SegmentationParams,
) -> list[RankedFrame]:
    """Drop frames whose head speed vs the previous retained pose exceeds
    the saccade threshold; the first frame is always retained."""
    if len(frames) != len(poses) or any(
        f.timestamp_ms != p.timestamp_ms for f, p in zip(frames, poses)
    ):
        raise InputError("frames and poses must align one-to-one by timestamp")
    if not frames:
        return []
    kept = [frames[0]]
    last_pose = poses[0]
    for frame, pose in zip(frames[1:], poses[1:]):
        if angular_speed(last_pose, pose) > params.saccade_speed_threshold_deg_per_s:
            continue
        kept.append(frame)
        last_pose = pose
    return kept


def candidate_set(frame: RankedFrame, params: SegmentationParams) -> list[str]:
    """Objects within the angular threshold, ascending-angle order."""
    return [oid for oid, angle in frame.entries if angle <= params.angular_threshold_deg]


def _median_gap_ms(timestamps: list[float]) -> float:
    if len(timestamps) < 2:
        return 0.0
    return statistics.median(b - a for a, b in zip(timestamps, timestamps[1:]))


def segment_fixations(
    frames: list[RankedFrame], params: SegmentationParams
) -> list[FixationSegment]:
    """Run-length encode consecutive frames with identical candidate sets.

    Set identity is by membership; the emitted likelihood order comes from
    the run's first frame.  Duration is last minus first frame timestamp
    plus one nominal frame period (median inter-frame gap), so a steady
    uniform-rate run reports its wall-clock dwell.  Runs shorter than the
    minimum fixation duration and empty candidate sets yield nothing.
    """
    for a, b in zip(frames, frames[1:]):
        if b.timestamp_ms <= a.timestamp_ms:
            raise InputError("frames must be strictly time-ordered")
    if not frames:
        return []
    period = _median_gap_ms([f.timestamp_ms for f in frames])

    runs: list[tuple[tuple[str, ...], float, float]] = []
    run_ids: tuple[str, ...] | None = None
    run_first = run_last = 0.0
    for frame in frames:
        ids = tuple(candidate_set(frame, params))
        if run_ids is not None and frozenset(ids) == frozenset(run_ids):
            run_last = frame.timestamp_ms
            continue
        if run_ids:
            runs.append((run_ids, run_first, run_last))
        run_ids = ids
        run_first = run_last = frame.timestamp_ms
    if run_ids:
        runs.append((run_ids, run_first, run_last))

    segments = []
    for ids, first, last in runs:
        duration = last - first + period
        if duration >= params.min_fixation_ms:
            segments.append(FixationSegment(object_ids=ids, start_ms=first, duration_ms=duration))
    return segments


def merge_segments(
    segments: list[FixationSegment], params: SegmentationParams
) -> list[FixationSegment]:
    """Merge same-membership neighbours separated by at most the merge
    window, transitively left-to-right.  The merged duration is the sum of
    the constituent durations (the gap itself is excluded); likelihood
    order comes from the earlier segment.

    The gap may come out negative when a nominal end overhangs the next
    start (duration-convention artifact on irregular streams); that still
    counts as within the merge window.
    """
    merged: list[FixationSegment] = []
    for seg in segments:
        if merged:
            prev = merged[-1]
            if seg.start_ms < prev.start_ms:
                raise InputError(
                    f"segments out of order: start {seg.start_ms} after {prev.start_ms}"
                )
            gap = seg.start_ms - prev.end_ms
            if seg.members() == prev.members() and gap <= params.merge_window_ms:
                merged[-1] = replace(prev, duration_ms=prev.duration_ms + seg.duration_ms)
                continue
        merged.append(seg)
    return merged


def build_gaze_history(
    poses: list[HeadPoseSample],
    scene: Scene,
    window: tuple[float, float],
    params: SegmentationParams,
) -> GazeHistory:
    """rank -> suppress -> segment -> merge, restricted to the window."""
    start, end = window
    in_window = [p for p in poses if start <= p.timestamp_ms <= end]
    if start >= end or not in_window:
        return GazeHistory(window_start_ms=start, window_end_ms=end)
    frames = [rank_objects(p, scene, params.sample_spacing_mm) for p in in_window]
    kept = suppress_saccades(frames, in_window, params)
    segments = merge_segments(segment_fixations(kept, params), params)
    return GazeHistory(window_start_ms=start, window_end_ms=end, segments=tuple(segments))


@dataclass(frozen=True)
class SegmentEvent:
    """Live notification from the streaming segmenter; durations are only
    authoritative after finalize()."""

    kind: str  # "opened" | "closed"
    object_ids: tuple[str, ...]
    start_ms: float
    end_ms: float | None = None


class StreamingSegmenter:
    """Incremental counterpart of the batch pipeline.

    Feed aligned (pose, frame) pairs one at a time; finalize() applies the
    duration convention and merging and returns exactly what the batch
    pipeline returns for the same inputs.  Single-owner: transferable
    between threads, never mutated concurrently.
    """

    def __init__(self, params: SegmentationParams):
        self.params = params
        self._last_pose: HeadPoseSample | None = None
        self._gaps: list[float] = []
        self._runs: list[tuple[tuple[str, ...], float, float]] = []
        self._run_ids: tuple[str, ...] | None = None
        self._run_first = 0.0
        self._run_last = 0.0

    def feed(self, pose: HeadPoseSample, frame: RankedFrame) -> list[SegmentEvent]:
        if pose.timestamp_ms != frame.timestamp_ms:
            raise InputError("pose and frame timestamps must match")
        if self._last_pose is not None:
            if angular_speed(self._last_pose, pose) > self.params.saccade_speed_threshold_deg_per_s:
                return []
            self._gaps.append(pose.timestamp_ms - self._last_pose.timestamp_ms)
        self._last_pose = pose

        events: list[SegmentEvent] = []
        ids = tuple(candidate_set(frame, self.params))
        if self._run_ids is not None and frozenset(ids) == frozenset(self._run_ids):
            self._run_last = frame.timestamp_ms
            return events
        if self._run_ids:
            events.append(self._close_event())
            self._runs.append((self._run_ids, self._run_first, self._run_last))
        self._run_ids = ids
        self._run_first = self._run_last = frame.timestamp_ms
        if ids:
            events.append(SegmentEvent(kind="opened", object_ids=ids, start_ms=frame.timestamp_ms))
        return events

    def _close_event(self) -> SegmentEvent:
        assert self._run_ids
        return SegmentEvent(
            kind="closed",
            object_ids=self._run_ids,
            start_ms=self._run_first,
            end_ms=self._run_last,
        )

    def finalize(self) -> list[FixationSegment]:
        """Close the open run and emit the merged, filtered segment list."""
        runs = list(self._runs)
        if self._run_ids:
            runs.append((self._run_ids, self._run_first, self._run_last))
        period = statistics.median(self._gaps) if self._gaps else 0.0
        segments = []
        for ids, first, last in runs:
            duration = last - first + period
            if duration >= self.params.min_fixation_ms:
                segments.append(
                    FixationSegment(object_ids=ids, start_ms=first, duration_ms=duration)
                )
        return merge_segments(segments, self.params)
