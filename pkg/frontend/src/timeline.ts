// Pure timeline state: the seven phases, rupture interruptions, terminal
// status. Fed by (possibly replayed) pipeline events; the cursor makes event
// application idempotent across SSE reconnects.

import type { PipelineEvent } from "./types.js";

export const PHASES = [
  "P1-ontological-setup",
  "P2-corpus-ingestion",
  "P3-parallel-ingestion",
  "P4-resonance-rupture",
  "P5-synthesis-mapping",
  "P6-cartographic-output",
  "P7-semantic-topography",
] as const;

export type PhaseStatus = "pending" | "running" | "done";

export interface RuptureBanner {
  reentryIndex: number;
  phase: string | null;
  incidentFraction: number;
  injectedCount: number | null; // null until reentry_completed arrives
}

export interface TimelineState {
  cursor: number;
  phases: Record<string, PhaseStatus>;
  ruptures: RuptureBanner[];
  kindCounts: Record<string, number>;
  terminal: "run_completed" | "run_failed" | null;
  topographyStatus: string | null;
  error: string | null;
}

export function initialTimeline(): TimelineState {
  const phases: Record<string, PhaseStatus> = {};
  for (const phase of PHASES) phases[phase] = "pending";
  return {
    cursor: -1,
    phases,
    ruptures: [],
    kindCounts: {},
    terminal: null,
    topographyStatus: null,
    error: null,
  };
}

/** Apply one event; duplicates (sequence <= cursor) leave state untouched. */
export function applyEvent(state: TimelineState, event: PipelineEvent): TimelineState {
  if (event.sequence <= state.cursor) return state;
  const next: TimelineState = {
    ...state,
    cursor: event.sequence,
    phases: { ...state.phases },
    ruptures: state.ruptures.slice(),
    kindCounts: { ...state.kindCounts },
  };
  next.kindCounts[event.kind] = (next.kindCounts[event.kind] ?? 0) + 1;
  switch (event.kind) {
    case "phase_started":
      next.phases[event.payload.phase] = "running";
      break;
    case "phase_completed":
      next.phases[event.payload.phase] = "done";
      break;
    case "rupture_triggered":
      next.ruptures.push({
        reentryIndex: event.payload.reentry_index,
        phase: event.phase,
        incidentFraction: event.payload.report?.incident_fraction ?? 0,
        injectedCount: null,
      });
      break;
    case "reentry_completed": {
      const banner = next.ruptures.find(
        (r) => r.reentryIndex === event.payload.reentry_index,
      );
      if (banner) banner.injectedCount = event.payload.injected_paper_ids.length;
      break;
    }
    case "run_completed":
      next.terminal = "run_completed";
      next.topographyStatus = event.payload.topography_status ?? null;
      break;
    case "run_failed":
      next.terminal = "run_failed";
      next.error = event.payload.error ?? "unknown failure";
      break;
  }
  return next;
}

export function applyAll(state: TimelineState, events: PipelineEvent[]): TimelineState {
  return events.reduce(applyEvent, state);
}

/** Ordered phase rows for rendering. */
export function timelineRows(state: TimelineState) {
  return PHASES.map((phase) => ({ phase, status: state.phases[phase] }));
}

export function completedPhaseOrder(events: PipelineEvent[]): string[] {
  return events
    .filter((e) => e.kind === "phase_completed")
    .sort((a, b) => a.sequence - b.sequence)
    .map((e) => e.payload.phase as string);
}
