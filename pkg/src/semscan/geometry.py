"""Head-forward-ray geometry over axis-aligned scene objects.

Per pose sample, every object's AABB surface is discretized into a grid of
sample points; the object's angular offset is the smallest angle between
the head's forward direction and any head-to-point vector.  Sorting the
offsets yields a ranked candidate list per frame.

Coordinates are meters, right-handed, +Z up.  Grid spacing is given in
millimeters.  Surface grids are cached per (box, spacing) since scenes are
static within a session and re-sampling is the per-frame hot loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateGeometryError, InputError

UNIT_NORM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class Vec3:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(c) for c in (self.x, self.y, self.z)):
            raise InputError(f"non-finite vector component in {(self.x, self.y, self.z)}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    @staticmethod
    def from_array(a: Sequence[float]) -> "Vec3":
        return Vec3(float(a[0]), float(a[1]), float(a[2]))

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def normalized(self) -> "Vec3":
        n = self.norm()
        if n == 0.0:
            raise InputError("cannot normalize a zero vector")
        return Vec3(self.x / n, self.y / n, self.z / n)


@dataclass(frozen=True)
class HeadPoseSample:
    """One timestamped head pose: origin plus unit forward direction."""

    timestamp_ms: float
    origin: Vec3
    forward: Vec3

    def __post_init__(self):
        if abs(self.forward.norm() - 1.0) > UNIT_NORM_TOLERANCE:
            raise InputError(
                f"forward vector not unit-norm (|v|={self.forward.norm():.8f}) "
                f"at t={self.timestamp_ms}"
            )


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned box; zero-extent axes are allowed (point/plane boxes)."""

    min: Vec3
    max: Vec3

    def __post_init__(self):
        if self.min.x > self.max.x or self.min.y > self.max.y or self.min.z > self.max.z:
            raise InputError(f"AABB min {self.min} exceeds max {self.max}")

    def center(self) -> Vec3:
        return Vec3(
            (self.min.x + self.max.x) / 2.0,
            (self.min.y + self.max.y) / 2.0,
            (self.min.z + self.max.z) / 2.0,
        )


@dataclass(frozen=True)
class SceneObject:
    id: str
    label: str
    aabb: Aabb
    kind: str = "object"  # "object" | "robot"

    def __post_init__(self):
        if self.kind not in ("object", "robot"):
            raise InputError(f"unknown object kind {self.kind!r}")


@dataclass(frozen=True)
class Scene:
    """Closed-world object set; exactly one robot/camera AOI."""

    objects: tuple[SceneObject, ...]

    def __post_init__(self):
        ids = [o.id for o in self.objects]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise InputError(f"duplicate object ids in scene: {dup}")
        robots = [o for o in self.objects if o.kind == "robot"]
        if len(robots) != 1:
            raise InputError(f"scene must contain exactly one robot AOI, found {len(robots)}")

    @property
    def robot(self) -> SceneObject:
        return next(o for o in self.objects if o.kind == "robot")

    def object_ids(self) -> list[str]:
        return [o.id for o in self.objects]

    def get(self, object_id: str) -> SceneObject:
        for o in self.objects:
            if o.id == object_id:
                return o
        raise KeyError(object_id)


@dataclass(frozen=True)
class RankedFrame:
    """Per-sample candidate list, ascending by angular offset."""

    timestamp_ms: float
    entries: tuple[tuple[str, float], ...] = field(default_factory=tuple)


def _axis_coords(lo: float, hi: float, spacing_m: float) -> np.ndarray:
    extent = hi - lo
    if extent == 0.0:
        return np.array([lo], dtype=np.float64)
    # intervals of at most `spacing_m`; epsilon guards exact multiples
    n = max(1, math.ceil(extent / spacing_m - 1e-12))
    return np.linspace(lo, hi, n + 1)


@lru_cache(maxsize=512)
def _surface_grid(aabb: Aabb, spacing_mm: float) -> np.ndarray:
    """Deduplicated face-grid sample points as a read-only (N, 3) array."""
    if spacing_mm <= 0:
        raise InputError(f"spacing must be positive, got {spacing_mm}")
    spacing_m = spacing_mm / 1000.0
    xs = _axis_coords(aabb.min.x, aabb.max.x, spacing_m)
    ys = _axis_coords(aabb.min.y, aabb.max.y, spacing_m)
    zs = _axis_coords(aabb.min.z, aabb.max.z, spacing_m)

    faces = []
    for x in (aabb.min.x, aabb.max.x):
        yy, zz = np.meshgrid(ys, zs, indexing="ij")
        faces.append(np.column_stack([np.full(yy.size, x), yy.ravel(), zz.ravel()]))
    for y in (aabb.min.y, aabb.max.y):
        xx, zz = np.meshgrid(xs, zs, indexing="ij")
        faces.append(np.column_stack([xx.ravel(), np.full(xx.size, y), zz.ravel()]))
    for z in (aabb.min.z, aabb.max.z):
        xx, yy = np.meshgrid(xs, ys, indexing="ij")
        faces.append(np.column_stack([xx.ravel(), yy.ravel(), np.full(xx.size, z)]))

    points = np.unique(np.vstack(faces), axis=0)
    points.setflags(write=False)
    return points


def sample_aabb_surface(aabb: Aabb, spacing_mm: float) -> list[Vec3]:
    """Sample points on the six box faces, deduplicated, corners included."""
    return [Vec3.from_array(row) for row in _surface_grid(aabb, spacing_mm)]


def clear_grid_cache() -> None:
    _surface_grid.cache_clear()


def angle_between_deg(u: np.ndarray, v: np.ndarray) -> float:
    """Angle via atan2(|cross|, dot): stable near 0 deg where acos is not."""
    cross = np.cross(u, v)
    return float(np.degrees(np.arctan2(np.linalg.norm(cross), float(np.dot(u, v)))))


def angular_offset_to_object(pose: HeadPoseSample, obj: SceneObject, spacing_mm: float) -> float:
    """Smallest forward-ray angle over the object's surface grid, degrees."""
    points = _surface_grid(obj.aabb, spacing_mm)
    rel = points - pose.origin.as_array()
    norms = np.linalg.norm(rel, axis=1)
    usable = norms > 0.0
    if not usable.any():
        raise DegenerateGeometryError(
            f"head origin coincides with every sample point of {obj.id!r}"
        )
    rel = rel[usable]
    f = pose.forward.as_array()
    dots = rel @ f
    cross_norms = np.linalg.norm(np.cross(f, rel), axis=1)
    angles = np.degrees(np.arctan2(cross_norms, dots))
    return float(angles.min())


def rank_objects(pose: HeadPoseSample, scene: Scene, spacing_mm: float) -> RankedFrame:
    """One (id, angle) entry per scene object, ascending; ties by id."""
    if not scene.objects:
        raise InputError("cannot rank objects of an empty scene")
    entries = [
        (obj.id, angular_offset_to_object(pose, obj, spacing_mm)) for obj in scene.objects
    ]
    entries.sort(key=lambda e: (e[1], e[0]))
    return RankedFrame(timestamp_ms=pose.timestamp_ms, entries=tuple(entries))


def angular_speed(prev: HeadPoseSample, curr: HeadPoseSample) -> float:
    """Forward-direction rotation rate between two samples, degrees/second."""
    dt_ms = curr.timestamp_ms - prev.timestamp_ms
    if dt_ms <= 0:
        raise InputError(
            f"non-increasing timestamps: {prev.timestamp_ms} -> {curr.timestamp_ms}"
        )
    angle = angle_between_deg(prev.forward.as_array(), curr.forward.as_array())
    return angle / (dt_ms / 1000.0)


def make_scene(objects: Iterable[SceneObject]) -> Scene:
    return Scene(objects=tuple(objects))
