// The whole UI is a pure function of the ordered session event stream:
// reconnect-and-replay rebuilds the identical view state.

import type { GazeHistoryDto, SessionEventDto } from "./types.js";

export interface ToolCallView {
  id: string;
  name: string;
  args: Record<string, string>;
  result: string | null;
}

export interface LiveSegmentView {
  objectIds: string[];
  startMs: number;
  endMs: number | null; // null while open
}

export interface TurnView {
  turnId: string;
  text: string;
  status: string | null; // null while running
  requiredObjects: string[] | null;
  gazeHistory: GazeHistoryDto | null;
  toolCalls: ToolCallView[];
  spoken: { person: string; text: string }[];
}

export interface ViewState {
  poseCount: number;
  liveSegments: LiveSegmentView[];
  turns: TurnView[];
  turnInFlight: boolean;
  awaitingClarification: boolean;
}

export function initialView(): ViewState {
  return {
    poseCount: 0,
    liveSegments: [],
    turns: [],
    turnInFlight: false,
    awaitingClarification: false,
  };
}

function currentTurn(state: ViewState): TurnView | null {
  return state.turns.length ? state.turns[state.turns.length - 1] : null;
}

export function reduceView(state: ViewState, event: SessionEventDto): ViewState {
  const next: ViewState = {
    ...state,
    liveSegments: [...state.liveSegments],
    turns: state.turns.map((t) => ({
      ...t,
      toolCalls: [...t.toolCalls],
      spoken: [...t.spoken],
    })),
  };
  const p = event.payload;
  switch (event.kind) {
    case "pose_accepted":
      next.poseCount += 1;
      break;
    case "segment_opened":
      next.liveSegments.push({
        objectIds: p.object_ids as string[],
        startMs: p.start_ms as number,
        endMs: null,
      });
      break;
    case "segment_closed": {
      const open = next.liveSegments.find(
        (s) => s.endMs === null && s.startMs === (p.start_ms as number)
      );
      if (open) {
        open.endMs = (p.end_ms as number) ?? open.startMs;
      }
      break;
    }
    case "turn_started":
      next.turns.push({
        turnId: p.turn_id as string,
        text: p.text as string,
        status: null,
        requiredObjects: null,
        gazeHistory: null,
        toolCalls: [],
        spoken: [],
      });
      next.turnInFlight = true;
      next.awaitingClarification = false;
      break;
    case "tool_call": {
      const turn = currentTurn(next);
      if (turn) {
        turn.toolCalls.push({
          id: p.id as string,
          name: p.name as string,
          args: p.arguments as Record<string, string>,
          result: null,
        });
      }
      break;
    }
    case "tool_result": {
      const turn = currentTurn(next);
      const call = turn?.toolCalls.find((c) => c.id === (p.id as string));
      if (call) {
        call.result = p.text as string;
      }
      break;
    }
    case "speak": {
      const turn = currentTurn(next);
      if (turn) {
        turn.spoken.push({ person: p.person_name as string, text: p.text as string });
      }
      break;
    }
    case "turn_completed": {
      const turn = currentTurn(next);
      if (turn) {
        turn.status = p.status as string;
        turn.requiredObjects = (p.required_objects as string[] | null) ?? null;
        turn.gazeHistory = (p.gaze_history as GazeHistoryDto) ?? null;
      }
      next.turnInFlight = false;
      next.awaitingClarification = p.status === "clarification_requested";
      break;
    }
    default:
      break; // session_created, ranked_frame: nothing to show directly
  }
  return next;
}

export function viewFromEvents(events: SessionEventDto[]): ViewState {
  return events.reduce(reduceView, initialView());
}

/** Object ids to badge on the scene: the latest completed turn's
 * required objects. */
export function requiredBadges(state: ViewState): Set<string> {
  for (let i = state.turns.length - 1; i >= 0; i--) {
    const turn = state.turns[i];
    if (turn.requiredObjects && turn.requiredObjects.length) {
      return new Set(turn.requiredObjects);
    }
  }
  return new Set();
}
