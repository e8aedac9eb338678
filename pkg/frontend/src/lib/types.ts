// Wire types mirroring the session service JSON payloads.

export interface Vec3 {
  x: number;
  y: number;
  z: number;
}

export interface AabbDto {
  min: number[];
  max: number[];
}

export interface SceneObjectDto {
  id: string;
  label: string;
  kind: string; // "object" | "robot"
  aabb: AabbDto;
}

export interface SessionEventDto {
  seq: number;
  kind: string;
  payload: Record<string, any>;
}

export interface TimelineSegmentDto {
  object_ids: string[];
  start_ms: number;
  duration_ms: number;
}

export interface GazeHistoryDto {
  window: [number, number];
  segments: TimelineSegmentDto[];
}

export interface TranscriptStepDto {
  call: { id: string; name: string; arguments: Record<string, string>; seq: number };
  result: { text: string; seq: number };
}

export interface TranscriptDto {
  scanpath_text: string;
  status: string;
  error: string | null;
  transport_retries: number;
  reasoning: string;
  required_objects: string[] | null;
  spoken: [string, string][];
  final_message: string | null;
  steps: TranscriptStepDto[];
}

export interface PoseSampleDto {
  t_ms: number;
  origin: number[];
  forward: number[];
}

export interface SessionInfoDto {
  session_id: string;
  robot_id: string;
  object_ids: string[];
  scene: SceneObjectDto[];
  pose_count: number;
  event_count: number;
  turn_ids: string[];
}
