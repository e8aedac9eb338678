"""Independent reference implementations used as test oracles.

Everything in here is deliberately written the dumb, obvious way (plain
loops, plain tuples) and must stay decoupled from the package modules it
is used to check.  Oracles operate on plain Python data:

  pose   = (t_ms, (ox, oy, oz), (fx, fy, fz))
  frame  = (t_ms, [(object_id, angle_deg), ...])   entries sorted ascending
  box    = ((minx, miny, minz), (maxx, maxy, maxz))
"""

from __future__ import annotations

import math
from itertools import product


# ---------------------------------------------------------------------------
# geometry oracles
# ---------------------------------------------------------------------------

def grid_coords(lo: float, hi: float, spacing_m: float) -> list[float]:
    """Evenly spaced coordinates covering [lo, hi] with step <= spacing_m."""
    extent = hi - lo
    if extent == 0.0:
        return [lo]
    n = max(1, math.ceil(extent / spacing_m - 1e-12))
    return [lo + extent * i / n for i in range(n + 1)]


def enumerate_surface_points(box, spacing_mm: float) -> set[tuple[float, float, float]]:
    """Brute-force enumeration of AABB face sample points (deduplicated)."""
    (minx, miny, minz), (maxx, maxy, maxz) = box
    s = spacing_mm / 1000.0
    xs = grid_coords(minx, maxx, s)
    ys = grid_coords(miny, maxy, s)
    zs = grid_coords(minz, maxz, s)
    points: set[tuple[float, float, float]] = set()
    for x in (minx, maxx):
        for y, z in product(ys, zs):
            points.add((x, y, z))
    for y in (miny, maxy):
        for x, z in product(xs, zs):
            points.add((x, y, z))
    for z in (minz, maxz):
        for x, y in product(xs, ys):
            points.add((x, y, z))
    return points


def angle_between_deg(u, v) -> float:
    """Plain acos-of-dot angle in degrees, clamped for safety."""
    nu = math.sqrt(sum(a * a for a in u))
    nv = math.sqrt(sum(a * a for a in v))
    if nu == 0.0 or nv == 0.0:
        raise ValueError("zero-length vector")
    d = sum(a * b for a, b in zip(u, v)) / (nu * nv)
    d = max(-1.0, min(1.0, d))
    return math.degrees(math.acos(d))


def min_angle_to_box(origin, forward, box, spacing_mm: float) -> float:
    """Smallest forward-ray angle over the box surface grid, by enumeration."""
    best = 180.0
    for p in enumerate_surface_points(box, spacing_mm):
        v = (p[0] - origin[0], p[1] - origin[1], p[2] - origin[2])
        if v == (0.0, 0.0, 0.0):
            continue
        a = angle_between_deg(forward, v)
        if a < best:
            best = a
    return best


def rank_by_min_angle(origin, forward, boxes: dict, spacing_mm: float) -> list[tuple[str, float]]:
    """Per-object brute-force minima, sorted (angle, id)."""
    out = [(oid, min_angle_to_box(origin, forward, box, spacing_mm)) for oid, box in boxes.items()]
    out.sort(key=lambda e: (e[1], e[0]))
    return out


def min_angle_to_box_fast(origin, forward, box, spacing_mm: float) -> float:
    """Dense-grid oracle with numpy for fine spacings.

    Assembles the six face grids without deduplication (duplicates cannot
    change a minimum) and uses plain arccos-of-dot, a different route from
    the implementation under test.
    """
    import numpy as np

    (minx, miny, minz), (maxx, maxy, maxz) = box
    s = spacing_mm / 1000.0
    xs = np.array(grid_coords(minx, maxx, s))
    ys = np.array(grid_coords(miny, maxy, s))
    zs = np.array(grid_coords(minz, maxz, s))
    stacks = []
    for x in (minx, maxx):
        yy, zz = np.meshgrid(ys, zs)
        stacks.append(np.column_stack([np.full(yy.size, x), yy.ravel(), zz.ravel()]))
    for y in (miny, maxy):
        xx, zz = np.meshgrid(xs, zs)
        stacks.append(np.column_stack([xx.ravel(), np.full(xx.size, y), zz.ravel()]))
    for z in (minz, maxz):
        xx, yy = np.meshgrid(xs, ys)
        stacks.append(np.column_stack([xx.ravel(), yy.ravel(), np.full(xx.size, z)]))
    points = np.vstack(stacks)
    rel = points - np.asarray(origin)
    norms = np.linalg.norm(rel, axis=1)
    rel = rel[norms > 0]
    norms = norms[norms > 0]
    f = np.asarray(forward) / np.linalg.norm(forward)
    cosines = np.clip((rel @ f) / norms, -1.0, 1.0)
    return float(np.degrees(np.arccos(cosines)).min())


def rank_by_min_angle_fast(origin, forward, boxes: dict, spacing_mm: float) -> list[tuple[str, float]]:
    out = [
        (oid, min_angle_to_box_fast(origin, forward, box, spacing_mm))
        for oid, box in boxes.items()
    ]
    out.sort(key=lambda e: (e[1], e[0]))
    return out


# ---------------------------------------------------------------------------
# segmentation oracles
# ---------------------------------------------------------------------------

def filter_saccades(poses, threshold_deg_per_s: float):
    """Offline saccade filter: keep indices whose speed vs the previous
    retained pose stays below the threshold; index 0 always retained."""
    kept = [0]
    for i in range(1, len(poses)):
        t_prev, _, f_prev = poses[kept[-1]]
        t_cur, _, f_cur = poses[i]
        dt_s = (t_cur - t_prev) / 1000.0
        speed = angle_between_deg(f_prev, f_cur) / dt_s
        if speed <= threshold_deg_per_s:
            kept.append(i)
    return kept


def median(values):
    vs = sorted(values)
    n = len(vs)
    if n == 0:
        return 0.0
    if n % 2 == 1:
        return vs[n // 2]
    return (vs[n // 2 - 1] + vs[n // 2]) / 2.0


def rle_segments(frames, angular_threshold_deg: float, min_fixation_ms: float):
    """Run-length-encode frames by candidate-set membership.

    Returns (object_ids_tuple, start_ms, duration_ms) triples.  Duration is
    last-first plus the median inter-frame gap of `frames`; runs below the
    minimum duration and empty candidate sets produce nothing.
    """
    if not frames:
        return []
    period = median([frames[i + 1][0] - frames[i][0] for i in range(len(frames) - 1)])
    runs = []  # (ids ordered from first frame of run, first_ts, last_ts)
    cur_ids: tuple[str, ...] | None = None
    cur_first = cur_last = 0.0
    for t, entries in frames:
        ids = tuple(oid for oid, ang in entries if ang <= angular_threshold_deg)
        if cur_ids is not None and frozenset(ids) == frozenset(cur_ids):
            cur_last = t
            continue
        if cur_ids:
            runs.append((cur_ids, cur_first, cur_last))
        cur_ids = ids
        cur_first = cur_last = t
    if cur_ids:
        runs.append((cur_ids, cur_first, cur_last))
    out = []
    for ids, first, last in runs:
        duration = last - first + period
        if duration >= min_fixation_ms:
            out.append((ids, first, duration))
    return out


def merge_rle(segments, merge_window_ms: float):
    """Left-to-right transitive merge of same-membership neighbours."""
    merged: list[tuple[tuple[str, ...], float, float]] = []
    for seg in segments:
        if merged:
            pids, pstart, pdur = merged[-1]
            ids, start, dur = seg
            gap = start - (pstart + pdur)
            if frozenset(pids) == frozenset(ids) and gap <= merge_window_ms:
                merged[-1] = (pids, pstart, pdur + dur)
                continue
        merged.append(seg)
    return merged


def reference_pipeline(poses, frames, params):
    """Full batch reference: saccade filter -> RLE -> merge.

    `params` is a plain dict with the segmentation parameter names.
    """
    kept = filter_saccades(poses, params["saccade_speed_threshold_deg_per_s"])
    kept_frames = [frames[i] for i in kept]
    segs = rle_segments(kept_frames, params["angular_threshold_deg"], params["min_fixation_ms"])
    return merge_rle(segs, params["merge_window_ms"])


# ---------------------------------------------------------------------------
# evaluation oracles
# ---------------------------------------------------------------------------

def odometer_interactions(users, tasks):
    """Nested-loop cartesian enumeration of per-task user choices."""
    combos = [[]]
    for _ in tasks:
        combos = [c + [u] for c in combos for u in users]
    return [tuple(zip(tasks, c)) for c in combos]


def chi_square_closed_form(a, b, c, d):
    """Pearson 2x2 statistic straight from the textbook formula."""
    n = a + b + c + d
    num = n * (a * d - b * c) ** 2
    den = (a + b) * (c + d) * (a + c) * (b + d)
    return num / den


def chi_square_p_value_1dof(stat):
    """Survival function of chi-square with one degree of freedom."""
    return math.erfc(math.sqrt(stat / 2.0))


def dwell_split_distribution(segments, categories):
    """Direct per-segment summation with even splitting.

    segments: (ids, duration) pairs; categories: id -> category name.
    Returns raw dwell per category (unnormalized).
    """
    totals: dict[str, float] = {}
    for ids, duration in segments:
        share = duration / len(ids)
        for oid in ids:
            cat = categories[oid]
            totals[cat] = totals.get(cat, 0.0) + share
    return totals
