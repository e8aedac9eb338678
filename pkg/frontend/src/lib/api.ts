// Thin typed client over the session service HTTP API, with a buffering
// pose sender that survives transient disconnects.

import type {
  GazeHistoryDto,
  PoseSampleDto,
  SessionEventDto,
  SessionInfoDto,
  TranscriptDto,
} from "./types.js";

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;

  constructor(code: string, message: string, status: number) {
    super(message);
    this.code = code;
    this.status = status;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface SubmitResponse {
  turn_id: string;
  transcript: TranscriptDto;
  gaze_history: GazeHistoryDto;
}

export class ApiClient {
  readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl: FetchLike = (...a) => fetch(...a)) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: body !== undefined ? { "content-type": "application/json" } : undefined,
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    const payload = await response.json().catch(() => ({}));
    if (!response.ok) {
      const err = (payload as any).error ?? {};
      throw new ApiError(err.code ?? "http_error", err.message ?? response.statusText, response.status);
    }
    return payload as T;
  }

  createSession(body: Record<string, unknown>): Promise<{ session_id: string }> {
    return this.request("POST", "/sessions", body);
  }

  sessionInfo(sessionId: string): Promise<SessionInfoDto> {
    return this.request("GET", `/sessions/${sessionId}`);
  }

  postPoses(sessionId: string, samples: PoseSampleDto[]): Promise<{ accepted: number }> {
    return this.request("POST", `/sessions/${sessionId}/poses`, { samples });
  }

  submitUtterance(
    sessionId: string,
    text: string,
    turnWindow?: [number, number],
    words?: [string, number, number][]
  ): Promise<SubmitResponse> {
    return this.request("POST", `/sessions/${sessionId}/utterance`, {
      text,
      turn_window: turnWindow ?? null,
      words: words ?? null,
    });
  }

  pollEvents(
    sessionId: string,
    fromSeq: number
  ): Promise<{ events: SessionEventDto[]; next_seq: number }> {
    return this.request("GET", `/sessions/${sessionId}/events/poll?from_seq=${fromSeq}`);
  }

  eventStreamUrl(sessionId: string, fromSeq: number): string {
    return `${this.baseUrl}/sessions/${sessionId}/events?from_seq=${fromSeq}`;
  }
}

export interface SenderState {
  pending: number;
  disconnected: boolean;
}

/** Batches pose samples; on failure keeps them queued and flags the
 * disconnect so the UI can show it. Order is preserved. */
export class PoseSender {
  private queue: PoseSampleDto[] = [];
  private flushing = false;
  disconnected = false;

  constructor(
    private readonly api: ApiClient,
    private readonly sessionId: string,
    private readonly onState: (state: SenderState) => void = () => {}
  ) {}

  enqueue(samples: PoseSampleDto[]): void {
    this.queue.push(...samples);
    this.notify();
  }

  get pending(): number {
    return this.queue.length;
  }

  private notify(): void {
    this.onState({ pending: this.queue.length, disconnected: this.disconnected });
  }

  /** Try to send everything queued; safe to call repeatedly. */
  async flush(): Promise<void> {
    if (this.flushing || this.queue.length === 0) {
      return;
    }
    this.flushing = true;
    try {
      const batch = this.queue.slice();
      await this.api.postPoses(this.sessionId, batch);
      this.queue.splice(0, batch.length);
      this.disconnected = false;
    } catch (err) {
      if (err instanceof ApiError && err.code === "stale_timestamp") {
        // server already has newer poses; drop the stale prefix
        this.queue.length = 0;
        this.disconnected = false;
      } else {
        this.disconnected = true; // keep buffering, flagged
      }
    } finally {
      this.flushing = false;
      this.notify();
    }
  }
}
