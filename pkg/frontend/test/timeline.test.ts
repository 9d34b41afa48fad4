import { describe, expect, it } from "vitest";

import {
  PHASES,
  applyAll,
  applyEvent,
  completedPhaseOrder,
  initialTimeline,
  timelineRows,
} from "../src/timeline.js";
import type { PipelineEvent } from "../src/types.js";

import transcript from "./fixtures/events.json";

const events = transcript as unknown as PipelineEvent[];

describe("phase timeline from a recorded fixture run", () => {
  it("renders all seven phases in pipeline order, all completed", () => {
    const state = applyAll(initialTimeline(), events);
    const rows = timelineRows(state);
    expect(rows.map((r) => r.phase)).toEqual([...PHASES]);
    expect(rows.every((r) => r.status === "done")).toBe(true);
    expect(completedPhaseOrder(events)).toEqual([...PHASES]);
  });

  it("shows rupture interruptions with injected-paper counts", () => {
    const state = applyAll(initialTimeline(), events);
    expect(state.ruptures.length).toBe(2);
    expect(state.ruptures[0].injectedCount).toBe(8);
    expect(state.ruptures[1].injectedCount).toBe(0);
    expect(state.ruptures.every((r) => r.incidentFraction > 0.4)).toBe(true);
  });

  it("terminates as completed with a topography status", () => {
    const state = applyAll(initialTimeline(), events);
    expect(state.terminal).toBe("run_completed");
    expect(state.topographyStatus).toBe("available");
  });

  it("ignores duplicate events, so replays cannot double-render", () => {
    const once = applyAll(initialTimeline(), events);
    const replayedTwice = applyAll(once, events); // full duplicate replay
    expect(replayedTwice).toEqual(once);
    expect(replayedTwice.ruptures.length).toBe(2);
    const counts = replayedTwice.kindCounts;
    expect(counts["phase_started"]).toBe(7);
    expect(counts["phase_completed"]).toBe(7);
  });

  it("marks a phase running between started and completed", () => {
    const started = events.find((e) => e.kind === "phase_started")!;
    const state = applyEvent(initialTimeline(), started);
    expect(state.phases[started.payload.phase]).toBe("running");
  });

  it("surfaces a failed run with its phase context", () => {
    const failure: PipelineEvent = {
      run_id: "run-x",
      sequence: 3,
      phase: "P2-corpus-ingestion",
      kind: "run_failed",
      payload: { phase: "P2-corpus-ingestion", error: "both sources unreachable" },
      timestamp: 0,
    };
    const state = applyEvent(initialTimeline(), failure);
    expect(state.terminal).toBe("run_failed");
    expect(state.error).toBe("both sources unreachable");
  });
});
