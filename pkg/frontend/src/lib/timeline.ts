// Timeline layout: fixation segments as horizontal bars, one lane per
// AOI set, durations labeled in seconds with two decimals (round half
// up, matching the transcript rendering).

import type { GazeHistoryDto } from "./types.js";

export interface TimelineBar {
  lane: number;
  laneLabel: string;
  startFrac: number;
  widthFrac: number;
  startMs: number;
  durationMs: number;
  durationLabel: string;
}

export interface TimelineLayout {
  lanes: string[];
  bars: TimelineBar[];
  windowMs: [number, number];
}

export function formatDurationS(durationMs: number): string {
  return (Math.round(durationMs / 10) / 100).toFixed(2) + "s";
}

export function layoutTimeline(history: GazeHistoryDto): TimelineLayout {
  const [start, end] = history.window;
  const span = Math.max(end - start, 1e-9);
  const lanes: string[] = [];
  const bars: TimelineBar[] = [];
  for (const seg of history.segments) {
    const label = seg.object_ids.join(", ");
    let lane = lanes.indexOf(label);
    if (lane < 0) {
      lane = lanes.length;
      lanes.push(label);
    }
    const startFrac = (seg.start_ms - start) / span;
    bars.push({
      lane,
      laneLabel: label,
      startFrac: Math.max(0, Math.min(1, startFrac)),
      widthFrac: Math.max(0.004, Math.min(1 - startFrac, seg.duration_ms / span)),
      startMs: seg.start_ms,
      durationMs: seg.duration_ms,
      durationLabel: formatDurationS(seg.duration_ms),
    });
  }
  return { lanes, bars, windowMs: [start, end] };
}

/** Durations as rendered in the prompt block (`N. [ids] D.DDs` lines). */
export function transcriptDurations(scanpathText: string): string[] {
  const out: string[] = [];
  for (const line of scanpathText.split("\n")) {
    const m = /^\d+\. \[[^\]]*\] (\d+\.\d{2}s)$/.exec(line.trim());
    if (m) {
      out.push(m[1]);
    }
  }
  return out;
}
