// DOM wiring for the companion app: steer a virtual gaze with the
// pointer over a top-down scene, compose an utterance, watch the agent's
// tool calls and the gaze timeline live. All state shown here derives
// from acked session events (no optimistic UI).

import { ApiClient, PoseSender } from "./lib/api.js";
import { GazeRecorder, hoveredWorldPoint } from "./lib/gaze.js";
import { EventLog } from "./lib/events.js";
import { layoutTimeline } from "./lib/timeline.js";
import { initialView, reduceView, requiredBadges, type ViewState } from "./lib/view.js";
import type { SceneObjectDto, SessionEventDto } from "./lib/types.js";

const params = new URLSearchParams(location.search);
const API_BASE = params.get("api") ?? "http://127.0.0.1:8000";
const SCENARIO = params.get("scenario") ?? "breakfast";

const api = new ApiClient(API_BASE);

const app = document.getElementById("app")!;
app.innerHTML = `
  <header>
    <h1>semscan</h1>
    <span id="status" class="status">connecting…</span>
  </header>
  <main>
    <section class="scene-panel">
      <canvas id="scene" width="640" height="520"></canvas>
      <form id="composer">
        <input id="utterance" type="text" placeholder="Say something… (drag on the scene to gaze first)"
               autocomplete="off" />
        <button id="submit" type="submit">Submit turn</button>
      </form>
      <div id="hint" class="hint">Drag over objects to steer the virtual gaze; release between looks.</div>
    </section>
    <section class="side-panel">
      <h2>Timeline</h2>
      <div id="timeline" class="timeline"></div>
      <h2>Agent</h2>
      <div id="agent" class="agent-log"></div>
    </section>
  </main>
`;

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const statusEl = document.getElementById("status")!;
const timelineEl = document.getElementById("timeline")!;
const agentEl = document.getElementById("agent")!;
const composer = document.getElementById("composer") as HTMLFormElement;
const utteranceInput = document.getElementById("utterance") as HTMLInputElement;
const submitBtn = document.getElementById("submit") as HTMLButtonElement;

let scene: SceneObjectDto[] = [];
let sessionId = "";
let view: ViewState = initialView();
let hovered: { x: number; y: number } | null = null;
let recording = false;
let turnWindowStart = 0;
let senderInfo = { pending: 0, disconnected: false };

const log = new EventLog();
const recorder = new GazeRecorder();
let sender: PoseSender;
let sampler: number | undefined;

// --- world <-> canvas -------------------------------------------------------

interface Bounds {
  minX: number;
  maxX: number;
  minY: number;
  maxY: number;
}

function sceneBounds(objects: SceneObjectDto[]): Bounds {
  const pad = 0.15;
  return {
    minX: Math.min(...objects.map((o) => o.aabb.min[0])) - pad,
    maxX: Math.max(...objects.map((o) => o.aabb.max[0])) + pad,
    minY: Math.min(...objects.map((o) => o.aabb.min[1])) - pad,
    maxY: Math.max(...objects.map((o) => o.aabb.max[1])) + pad,
  };
}

let bounds: Bounds = { minX: -1, maxX: 1, minY: -0.2, maxY: 1.7 };

function toCanvas(x: number, y: number): [number, number] {
  const cx = ((x - bounds.minX) / (bounds.maxX - bounds.minX)) * canvas.width;
  const cy = canvas.height - ((y - bounds.minY) / (bounds.maxY - bounds.minY)) * canvas.height;
  return [cx, cy];
}

function toWorld(cx: number, cy: number): [number, number] {
  const x = bounds.minX + (cx / canvas.width) * (bounds.maxX - bounds.minX);
  const y = bounds.minY + ((canvas.height - cy) / canvas.height) * (bounds.maxY - bounds.minY);
  return [x, y];
}

// --- rendering ---------------------------------------------------------------

function drawScene(): void {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = "#f4efe8";
  ctx.fillRect(0, 0, canvas.width, canvas.height);

  const badges = requiredBadges(view);
  for (const o of scene) {
    const [x0, y0] = toCanvas(o.aabb.min[0], o.aabb.max[1]);
    const [x1, y1] = toCanvas(o.aabb.max[0], o.aabb.min[1]);
    const w = x1 - x0;
    const h = y1 - y0;
    ctx.fillStyle = o.kind === "robot" ? "#cdd8ea" : "#d9e6d3";
    ctx.strokeStyle = "#44525f";
    ctx.lineWidth = 1;
    ctx.fillRect(x0, y0, w, h);
    ctx.strokeRect(x0, y0, w, h);
    if (badges.has(o.id)) {
      ctx.strokeStyle = "#c7901b";
      ctx.lineWidth = 3;
      ctx.strokeRect(x0 - 4, y0 - 4, w + 8, h + 8);
      ctx.fillStyle = "#c7901b";
      ctx.font = "bold 14px sans-serif";
      ctx.fillText("required", x0, y0 - 8);
    }
    ctx.fillStyle = "#2c3540";
    ctx.font = "12px sans-serif";
    ctx.fillText(o.id, x0 + 2, y1 + 14);
  }

  const open = view.liveSegments.find((s) => s.endMs === null);
  if (open) {
    ctx.fillStyle = "#44525f";
    ctx.font = "13px sans-serif";
    ctx.fillText(`gazing: ${open.objectIds.join(", ")}`, 10, 18);
  }

  if (hovered) {
    const [cx, cy] = toCanvas(hovered.x, hovered.y);
    ctx.beginPath();
    ctx.arc(cx, cy, recording ? 9 : 5, 0, Math.PI * 2);
    ctx.strokeStyle = recording ? "#b4432f" : "#6b7b8c";
    ctx.lineWidth = 2;
    ctx.stroke();
  }
}

function renderTimeline(): void {
  const turn = view.turns[view.turns.length - 1];
  timelineEl.innerHTML = "";
  if (!turn || !turn.gazeHistory) {
    const live = view.liveSegments.slice(-6);
    timelineEl.textContent = live.length
      ? "live: " + live.map((s) => s.objectIds.join("+")).join(" → ")
      : "(no turn yet)";
    return;
  }
  const layout = layoutTimeline(turn.gazeHistory);
  for (const bar of layout.bars) {
    const row = document.createElement("div");
    row.className = "lane";
    const label = document.createElement("span");
    label.className = "lane-label";
    label.textContent = bar.laneLabel;
    const track = document.createElement("div");
    track.className = "track";
    const fill = document.createElement("div");
    fill.className = "bar";
    fill.style.left = `${bar.startFrac * 100}%`;
    fill.style.width = `${bar.widthFrac * 100}%`;
    fill.title = `${bar.durationLabel} @ ${bar.startMs.toFixed(0)} ms`;
    const duration = document.createElement("span");
    duration.className = "duration";
    duration.textContent = bar.durationLabel;
    track.appendChild(fill);
    row.append(label, track, duration);
    timelineEl.appendChild(row);
  }
  const utterance = document.createElement("div");
  utterance.className = "utterance-row";
  utterance.textContent = `“${turn.text}”`;
  timelineEl.appendChild(utterance);
}

function renderAgent(): void {
  agentEl.innerHTML = "";
  const turn = view.turns[view.turns.length - 1];
  if (!turn) {
    agentEl.textContent = "(submit a turn)";
    return;
  }
  for (const call of turn.toolCalls) {
    const line = document.createElement("div");
    line.className = "tool-line";
    const args = Object.entries(call.args)
      .map(([k, v]) => `${k}=${JSON.stringify(v)}`)
      .join(", ");
    line.textContent = `${call.name}(${args})`;
    if (call.result) {
      const result = document.createElement("div");
      result.className = "tool-result";
      result.textContent = `→ ${call.result}`;
      line.appendChild(result);
    }
    agentEl.appendChild(line);
  }
  for (const s of turn.spoken) {
    const line = document.createElement("div");
    line.className = "speak-line";
    line.textContent = `🗣 ${s.text}`;
    agentEl.appendChild(line);
  }
  if (turn.status) {
    const line = document.createElement("div");
    line.className = `status-line status-${turn.status}`;
    line.textContent = turn.status.replace(/_/g, " ");
    agentEl.appendChild(line);
  }
}

function renderStatus(): void {
  const bits = [
    sessionId ? `session ${sessionId.slice(0, 8)}` : "no session",
    `${view.poseCount} poses`,
  ];
  if (senderInfo.pending) bits.push(`${senderInfo.pending} buffered`);
  if (senderInfo.disconnected) bits.push("DISCONNECTED (buffering)");
  if (view.turnInFlight) bits.push("turn running…");
  statusEl.textContent = bits.join(" · ");
  statusEl.classList.toggle("disconnected", senderInfo.disconnected);
  submitBtn.disabled = view.turnInFlight || !sessionId;
}

function renderAll(): void {
  drawScene();
  renderTimeline();
  renderAgent();
  renderStatus();
}

function applyEvents(events: SessionEventDto[]): void {
  if (log.addAll(events) > 0) {
    view = log.ordered().reduce(reduceView, initialView());
    if (view.awaitingClarification) {
      utteranceInput.focus();
    }
    renderAll();
  }
}

// --- pointer-driven gaze ------------------------------------------------------

canvas.addEventListener("pointermove", (e) => {
  const rect = canvas.getBoundingClientRect();
  const [x, y] = toWorld(e.clientX - rect.left, e.clientY - rect.top);
  hovered = { x, y };
  drawScene();
});

canvas.addEventListener("pointerdown", () => {
  if (!sessionId) return;
  recording = true;
  recorder.gap(500); // separates gestures so jumps read as dropouts
  sampler = window.setInterval(() => {
    if (!hovered) return;
    const point = hoveredWorldPoint(scene, hovered.x, hovered.y);
    sender.enqueue([recorder.sampleAt(point)]);
    void sender.flush();
  }, recorder.periodMs);
});

function stopRecording(): void {
  recording = false;
  if (sampler !== undefined) {
    clearInterval(sampler);
    sampler = undefined;
  }
  void sender.flush();
}

canvas.addEventListener("pointerup", stopRecording);
canvas.addEventListener("pointerleave", stopRecording);

// --- turn submission -----------------------------------------------------------

composer.addEventListener("submit", (e) => {
  e.preventDefault();
  const text = utteranceInput.value.trim();
  if (!text) {
    utteranceInput.classList.add("invalid");
    setTimeout(() => utteranceInput.classList.remove("invalid"), 600);
    return;
  }
  if (view.turnInFlight) return;
  const windowEnd = recorder.clockMs;
  submitBtn.disabled = true;
  api
    .submitUtterance(sessionId, text, [turnWindowStart, windowEnd])
    .then(() => {
      turnWindowStart = windowEnd;
      utteranceInput.value = "";
    })
    .catch((err) => {
      statusEl.textContent = `error: ${err.message}`;
    })
    .finally(() => {
      submitBtn.disabled = false;
    });
});

// --- event subscription ----------------------------------------------------------

let pollTimer: number | undefined;

function subscribe(): void {
  const source = new EventSource(api.eventStreamUrl(sessionId, log.nextSeq));
  let failures = 0;
  source.onmessage = (e) => {
    failures = 0;
    applyEvents([JSON.parse(e.data)]);
  };
  source.onerror = () => {
    failures += 1;
    if (failures >= 3) {
      source.close();
      pollTimer = window.setInterval(async () => {
        try {
          const page = await api.pollEvents(sessionId, log.nextSeq);
          applyEvents(page.events);
        } catch {
          /* next tick retries */
        }
      }, 400);
    }
  };
}

// --- boot -------------------------------------------------------------------------

async function boot(): Promise<void> {
  try {
    const created = await api.createSession({ scenario: SCENARIO, backend: "heuristic" });
    sessionId = created.session_id;
    const info = await api.sessionInfo(sessionId);
    scene = info.scene;
    bounds = sceneBounds(scene);
    sender = new PoseSender(api, sessionId, (s) => {
      senderInfo = s;
      renderStatus();
    });
    subscribe();
    renderAll();
  } catch (err) {
    statusEl.textContent = `cannot reach service at ${API_BASE}: ${(err as Error).message}`;
    statusEl.classList.add("disconnected");
  }
}

void boot();

window.addEventListener("beforeunload", () => {
  if (pollTimer !== undefined) clearInterval(pollTimer);
});
