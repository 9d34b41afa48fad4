import { describe, expect, it } from "vitest";

import { EventStream, type EventSourceLike, type MessageLike } from "../src/sse.js";
import type { PipelineEvent } from "../src/types.js";

import transcript from "./fixtures/events.json";

const events = transcript as unknown as PipelineEvent[];

/** Scriptable EventSource: delivers a slice of the transcript, then -- if
 * told to -- drops the connection. Reconnections honor from_sequence the way
 * the server does (replay INCLUDES the requested sequence). */
class FakeSource implements EventSourceLike {
  private listeners = new Map<string, (m: MessageLike) => void>();
  closed = false;

  constructor(
    private readonly slice: PipelineEvent[],
    private readonly dropAfter: number | null,
  ) {}

  addEventListener(type: string, listener: (m: MessageLike) => void): void {
    this.listeners.set(type, listener);
  }

  close(): void {
    this.closed = true;
  }

  pump(): void {
    let delivered = 0;
    for (const event of this.slice) {
      if (this.closed) return;
      if (this.dropAfter !== null && delivered >= this.dropAfter) {
        this.listeners.get("error")?.({ data: "" });
        return;
      }
      this.listeners.get(event.kind)?.({ data: JSON.stringify(event) });
      delivered += 1;
    }
  }
}

function fromSequence(url: string): number {
  const match = /from_sequence=(\d+)/.exec(url);
  return match ? Number(match[1]) : 0;
}

describe("SSE subscription with reconnect", () => {
  it("delivers the whole run exactly once on a clean stream", () => {
    const seen: number[] = [];
    let source: FakeSource | null = null;
    const stream = new EventStream(
      (url) => {
        source = new FakeSource(events.slice(fromSequence(url)), null);
        return source;
      },
      "",
      "run-x",
      { onEvent: (e) => seen.push(e.sequence) },
    );
    stream.connect();
    source!.pump();
    expect(seen).toEqual(events.map((e) => e.sequence));
  });

  it("reconnect resumes via cursor with no duplicates and no gaps", () => {
    const seen: number[] = [];
    const sources: FakeSource[] = [];
    let dropAfter: number | null = 20; // first connection dies mid-run
    const stream = new EventStream(
      (url) => {
        // The server replays from the requested sequence inclusive, which
        // overlaps what we already saw; the client cursor must drop those.
        const start = Math.max(0, fromSequence(url) - 3);
        const source = new FakeSource(events.slice(start), dropAfter);
        sources.push(source);
        return source;
      },
      "",
      "run-x",
      {
        onEvent: (e) => seen.push(e.sequence),
        onConnectionLoss: () => {
          dropAfter = null;
          stream.reconnect();
          sources[sources.length - 1].pump();
        },
      },
    );
    stream.connect();
    sources[0].pump();
    const expected = events.map((e) => e.sequence);
    expect(seen).toEqual(expected); // set equality AND order, no duplicates
    expect(new Set(seen).size).toBe(seen.length);
  });

  it("closes the source after the terminal event", () => {
    let source: FakeSource | null = null;
    let terminal: string | null = null;
    const stream = new EventStream(
      () => {
        source = new FakeSource(events, null);
        return source;
      },
      "",
      "run-x",
      { onEvent: () => undefined, onTerminal: (kind) => (terminal = kind) },
    );
    stream.connect();
    source!.pump();
    expect(terminal).toBe("run_completed");
    expect(source!.closed).toBe(true);
  });

  it("requests resumption from cursor + 1", () => {
    const urls: string[] = [];
    const stream = new EventStream(
      (url) => {
        urls.push(url);
        return new FakeSource(events.slice(0, 5), null);
      },
      "",
      "run-x",
      { onEvent: () => undefined },
    );
    stream.connect();
    (stream as any).source.pump();
    stream.reconnect();
    expect(urls[0]).not.toContain("from_sequence");
    expect(urls[1]).toContain("from_sequence=5");
  });
});
