// SSE subscription with cursor-based dedupe and reconnection.
//
// The server honors Last-Event-ID as from_sequence, meaning the replay
// RE-INCLUDES the event with that sequence; the cursor here drops anything
// already delivered, so reconnects never double-apply.

import type { PipelineEvent } from "./types.js";

export const EVENT_KINDS = [
  "run_started",
  "phase_started",
  "lenses_generated",
  "papers_fetched",
  "duplicates_removed",
  "lens_reading_done",
  "anomaly_detected",
  "rupture_triggered",
  "reentry_completed",
  "edge_classified",
  "assemblage_built",
  "cartography_ready",
  "topography_ready",
  "phase_completed",
  "run_completed",
  "run_failed",
] as const;

export interface MessageLike {
  data: string;
}

export interface EventSourceLike {
  addEventListener(type: string, listener: (event: MessageLike) => void): void;
  close(): void;
}

export type EventSourceFactory = (url: string) => EventSourceLike;

export interface StreamCallbacks {
  onEvent: (event: PipelineEvent) => void;
  onTerminal?: (kind: string) => void;
  onConnectionLoss?: () => void;
}

const TERMINAL = new Set(["run_completed", "run_failed"]);

export class EventStream {
  cursor = -1;
  private source: EventSourceLike | null = null;
  private closed = false;

  constructor(
    private readonly makeSource: EventSourceFactory,
    private readonly baseUrl: string,
    private readonly runId: string,
    private readonly callbacks: StreamCallbacks,
  ) {}

  private url(): string {
    const base = `${this.baseUrl}/runs/${this.runId}/events`;
    // Resume from the first unseen sequence after a reconnect.
    return this.cursor >= 0 ? `${base}?from_sequence=${this.cursor + 1}` : base;
  }

  connect(): void {
    if (this.closed) return;
    this.source = this.makeSource(this.url());
    for (const kind of EVENT_KINDS) {
      this.source.addEventListener(kind, (message) => this.deliver(message));
    }
    this.source.addEventListener("error", () => {
      if (this.closed) return;
      this.callbacks.onConnectionLoss?.();
    });
  }

  /** Drop the connection and resubscribe from the cursor. */
  reconnect(): void {
    this.source?.close();
    this.connect();
  }

  private deliver(message: MessageLike): void {
    let event: PipelineEvent;
    try {
      event = JSON.parse(message.data) as PipelineEvent;
    } catch {
      return;
    }
    if (event.sequence <= this.cursor) return; // replayed duplicate
    this.cursor = event.sequence;
    this.callbacks.onEvent(event);
    if (TERMINAL.has(event.kind)) {
      this.callbacks.onTerminal?.(event.kind);
      this.close();
    }
  }

  close(): void {
    this.closed = true;
    this.source?.close();
  }
}
