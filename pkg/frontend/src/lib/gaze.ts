// Cursor-as-gaze synthesis: a fixed virtual head looks toward hovered
// world points, emitting unit forward vectors at a fixed sample rate with
// strictly monotone timestamps. All pipeline logic (ranking, fixation
// segmentation) stays server-side; this module only produces poses.

import type { PoseSampleDto, SceneObjectDto, Vec3 } from "./types.js";

export const VIRTUAL_HEAD: Vec3 = { x: 0.0, y: -0.45, z: 1.25 };
export const SAMPLE_PERIOD_MS = 20;

export function norm(v: Vec3): number {
  return Math.sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
}

export function forwardToward(head: Vec3, point: Vec3): Vec3 {
  const d = { x: point.x - head.x, y: point.y - head.y, z: point.z - head.z };
  const n = norm(d);
  if (n === 0) {
    throw new Error("gaze point coincides with the virtual head");
  }
  return { x: d.x / n, y: d.y / n, z: d.z / n };
}

export function aabbCenter(o: SceneObjectDto): Vec3 {
  return {
    x: (o.aabb.min[0] + o.aabb.max[0]) / 2,
    y: (o.aabb.min[1] + o.aabb.max[1]) / 2,
    z: (o.aabb.min[2] + o.aabb.max[2]) / 2,
  };
}

export function objectAt(scene: SceneObjectDto[], x: number, y: number): SceneObjectDto | null {
  for (const o of scene) {
    if (x >= o.aabb.min[0] && x <= o.aabb.max[0] && y >= o.aabb.min[1] && y <= o.aabb.max[1]) {
      return o;
    }
  }
  return null;
}

/** World point under the cursor: the hovered object's center height, or
 * the table plane when pointing at empty table. */
export function hoveredWorldPoint(scene: SceneObjectDto[], x: number, y: number): Vec3 {
  const hit = objectAt(scene, x, y);
  if (hit) {
    return { x, y, z: (hit.aabb.min[2] + hit.aabb.max[2]) / 2 };
  }
  const tableZ = Math.min(...scene.map((o) => o.aabb.min[2]));
  return { x, y, z: tableZ };
}

/** Stateful pose source for one session; single owner. */
export class GazeRecorder {
  private t: number;
  readonly head: Vec3;
  readonly periodMs: number;

  constructor(head: Vec3 = VIRTUAL_HEAD, periodMs: number = SAMPLE_PERIOD_MS, startMs = 0) {
    this.head = head;
    this.periodMs = periodMs;
    this.t = startMs;
  }

  get clockMs(): number {
    return this.t;
  }

  /** One sample aimed at `point`; advances the session clock. */
  sampleAt(point: Vec3): PoseSampleDto {
    const f = forwardToward(this.head, point);
    const sample: PoseSampleDto = {
      t_ms: this.t,
      origin: [this.head.x, this.head.y, this.head.z],
      forward: [f.x, f.y, f.z],
    };
    this.t += this.periodMs;
    return sample;
  }

  /** Silent gap (no samples) between gestures, e.g. while the pointer is
   * up; keeps orientation jumps from reading as head saccades. */
  gap(ms: number): void {
    this.t += ms;
  }

  /** Steady dwell: durationMs worth of samples aimed at one point. */
  hover(point: Vec3, durationMs: number): PoseSampleDto[] {
    const count = Math.max(1, Math.round(durationMs / this.periodMs));
    const samples: PoseSampleDto[] = [];
    for (let i = 0; i < count; i++) {
      samples.push(this.sampleAt(point));
    }
    return samples;
  }
}
