import { describe, expect, it } from "vitest";

import {
  GazeRecorder,
  SAMPLE_PERIOD_MS,
  VIRTUAL_HEAD,
  aabbCenter,
  forwardToward,
  hoveredWorldPoint,
  norm,
  objectAt,
} from "../src/lib/gaze.js";
import type { SceneObjectDto } from "../src/lib/types.js";

const SCENE: SceneObjectDto[] = [
  {
    id: "cereal_box",
    label: "cereal box",
    kind: "object",
    aabb: { min: [-0.72, 0.25, 0.72], max: [-0.64, 0.45, 1.02] },
  },
  {
    id: "bowl",
    label: "large bowl",
    kind: "object",
    aabb: { min: [0.27, 0.45, 0.72], max: [0.45, 0.63, 0.81] },
  },
  {
    id: "the_robot",
    label: "the robot",
    kind: "robot",
    aabb: { min: [-0.12, 1.39, 1.15], max: [0.12, 1.51, 1.35] },
  },
];

describe("forwardToward", () => {
  it("returns unit vectors", () => {
    const f = forwardToward(VIRTUAL_HEAD, { x: 0.3, y: 0.5, z: 0.8 });
    expect(norm(f)).toBeCloseTo(1.0, 12);
  });

  it("points from head to target", () => {
    const f = forwardToward({ x: 0, y: 0, z: 0 }, { x: 0, y: 2, z: 0 });
    expect(f).toEqual({ x: 0, y: 1, z: 0 });
  });

  it("rejects a zero-length ray", () => {
    expect(() => forwardToward(VIRTUAL_HEAD, { ...VIRTUAL_HEAD })).toThrow();
  });
});

describe("hover targets", () => {
  it("finds the object under the cursor", () => {
    expect(objectAt(SCENE, -0.68, 0.35)?.id).toBe("cereal_box");
    expect(objectAt(SCENE, 0.0, 0.0)).toBeNull();
  });

  it("uses the hovered object's center height", () => {
    const p = hoveredWorldPoint(SCENE, -0.68, 0.35);
    expect(p.z).toBeCloseTo((0.72 + 1.02) / 2, 12);
  });

  it("falls back to the table plane off-object", () => {
    const p = hoveredWorldPoint(SCENE, 0.0, 0.1);
    expect(p.z).toBeCloseTo(0.72, 12);
  });
});

describe("GazeRecorder", () => {
  it("emits strictly monotone timestamps at the sample period", () => {
    const rec = new GazeRecorder();
    const a = rec.sampleAt({ x: 0, y: 1, z: 1 });
    const b = rec.sampleAt({ x: 0, y: 1, z: 1 });
    expect(b.t_ms - a.t_ms).toBe(SAMPLE_PERIOD_MS);
    expect(b.t_ms).toBeGreaterThan(a.t_ms);
  });

  it("hover emits duration/period samples, all unit-norm", () => {
    const rec = new GazeRecorder();
    const samples = rec.hover(aabbCenter(SCENE[0]), 1000);
    expect(samples.length).toBe(50);
    for (const s of samples) {
      const n = Math.hypot(s.forward[0], s.forward[1], s.forward[2]);
      expect(n).toBeCloseTo(1.0, 9);
    }
    const ts = samples.map((s) => s.t_ms);
    expect([...ts].sort((x, y) => x - y)).toEqual(ts);
    expect(new Set(ts).size).toBe(ts.length);
  });

  it("gaps advance the clock without emitting", () => {
    const rec = new GazeRecorder();
    rec.hover(aabbCenter(SCENE[0]), 200);
    const before = rec.clockMs;
    rec.gap(500);
    expect(rec.clockMs).toBe(before + 500);
  });

  it("keeps timestamps monotone across hover/gap/hover", () => {
    const rec = new GazeRecorder();
    const first = rec.hover(aabbCenter(SCENE[0]), 400);
    rec.gap(300);
    const second = rec.hover(aabbCenter(SCENE[1]), 400);
    const all = [...first, ...second].map((s) => s.t_ms);
    for (let i = 1; i < all.length; i++) {
      expect(all[i]).toBeGreaterThan(all[i - 1]);
    }
  });
});
