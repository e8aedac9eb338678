// Ordered, deduplicated session event log. Delivery is at-least-once;
// consumers read the contiguous prefix so replays and reconnects cannot
// reorder or duplicate what the UI sees.

import type { SessionEventDto } from "./types.js";

export class EventLog {
  private bySeq = new Map<number, SessionEventDto>();
  private contiguous = 0; // first missing sequence number

  /** Returns true when the event was new. */
  add(event: SessionEventDto): boolean {
    if (this.bySeq.has(event.seq)) {
      return false;
    }
    this.bySeq.set(event.seq, event);
    while (this.bySeq.has(this.contiguous)) {
      this.contiguous += 1;
    }
    return true;
  }

  addAll(events: SessionEventDto[]): number {
    let added = 0;
    for (const e of events) {
      if (this.add(e)) added += 1;
    }
    return added;
  }

  /** Next sequence number to request on (re)connect. */
  get nextSeq(): number {
    return this.contiguous;
  }

  /** Contiguous prefix, ordered by sequence number. */
  ordered(): SessionEventDto[] {
    const out: SessionEventDto[] = [];
    for (let seq = 0; seq < this.contiguous; seq++) {
      out.push(this.bySeq.get(seq)!);
    }
    return out;
  }
}
