// Application wiring: launch form, live phase timeline, rhizome graph, and
// topography views, all fed from the public REST/SSE surface.

import { fetchCartography, fetchGraph, fetchTopography, launchRun } from "./api.js";
import { EventStream } from "./sse.js";
import {
  applyEvent,
  initialTimeline,
  timelineRows,
  type TimelineState,
} from "./timeline.js";
import { GraphView, paperDetailHtml } from "./graphView.js";
import { TopographyView } from "./topoView.js";
import type { PaperSummary, PipelineEvent, RunForm } from "./types.js";

const BASE_URL = "";

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

function renderTimeline(state: TimelineState): void {
  const list = el<HTMLOListElement>("phase-list");
  list.innerHTML = "";
  for (const row of timelineRows(state)) {
    const item = document.createElement("li");
    item.className = `phase phase-${row.status}`;
    item.textContent = row.phase;
    list.appendChild(item);
  }
  const banners = el<HTMLDivElement>("rupture-banners");
  banners.innerHTML = "";
  for (const rupture of state.ruptures) {
    const banner = document.createElement("div");
    banner.className = "rupture-banner";
    const injected =
      rupture.injectedCount === null ? "re-entry running" : `${rupture.injectedCount} injected`;
    banner.textContent =
      `asignifying rupture #${rupture.reentryIndex}: ` +
      `${(rupture.incidentFraction * 100).toFixed(0)}% hub concentration: ${injected}`;
    banners.appendChild(banner);
  }
  const status = el<HTMLParagraphElement>("run-status");
  if (state.terminal === "run_completed") {
    status.textContent = `run completed (topography ${state.topographyStatus ?? "?"})`;
  } else if (state.terminal === "run_failed") {
    status.textContent = `run failed: ${state.error}`;
  } else if (state.cursor >= 0) {
    status.textContent = "run in progress";
  }
}

async function showResults(runId: string, graphView: GraphView, topoView: TopographyView) {
  const cartography = await fetchCartography(BASE_URL, runId);
  const papers = new Map<string, PaperSummary>(
    cartography.corpus.map((p: PaperSummary) => [p.id, p]),
  );
  const tensionsByPaper = new Map<string, string[]>();
  for (const reading of cartography.readings ?? []) {
    if (reading.tensions.length) {
      const existing = tensionsByPaper.get(reading.paper_id) ?? [];
      tensionsByPaper.set(reading.paper_id, existing.concat(reading.tensions));
    }
  }
  const graph = await fetchGraph(BASE_URL, runId);
  const view = new GraphView(el<any>("graph-svg") as any, {
    papers,
    onSelect: (paper, nodeId) => {
      const detail = el<HTMLDivElement>("paper-detail");
      detail.innerHTML = paper
        ? paperDetailHtml(paper, tensionsByPaper.get(paper.id) ?? [])
        : `<p>${nodeId}</p>`;
    },
  });
  view.render(graph);
  for (const edgeClass of ["constructive", "critical", "rhizomatic"]) {
    const box = el<HTMLInputElement>(`filter-${edgeClass}`);
    box.onchange = () => view.setClassFilter(edgeClass, box.checked);
  }
  const topo = await fetchTopography(BASE_URL, runId);
  if (topo.topography) {
    const titles = new Map<string, string>(
      cartography.corpus.map((p: PaperSummary) => [p.id, p.title]),
    );
    topoView.render(topo.topography, titles);
  } else {
    topoView.renderUnavailable(topo.status);
  }
  void graphView; // the initial instance is replaced per run
}

function main(): void {
  const graphView = new GraphView(el<any>("graph-svg") as any);
  const topoView = new TopographyView(el<any>("topo-svg") as any);
  let timeline = initialTimeline();
  renderTimeline(timeline);

  el<HTMLFormElement>("launch-form").addEventListener("submit", async (submit) => {
    submit.preventDefault();
    const form: RunForm = {
      zone: el<HTMLInputElement>("zone").value,
      per_source_limit: Number(el<HTMLInputElement>("max-papers").value),
      max_reentries: Number(el<HTMLInputElement>("max-reentries").value),
      centralization_threshold: Number(el<HTMLInputElement>("threshold").value),
      provider_kind: "live-http",
      endpoint: el<HTMLInputElement>("endpoint").value,
    };
    const errorBox = el<HTMLDivElement>("form-errors");
    errorBox.innerHTML = "";
    const result = await launchRun(BASE_URL, form);
    if (!result.ok) {
      for (const error of result.errors) {
        const line = document.createElement("p");
        line.className = "field-error";
        line.textContent = `${error.field}: ${error.reason}`;
        errorBox.appendChild(line);
      }
      return;
    }
    timeline = initialTimeline();
    renderTimeline(timeline);
    const stream = new EventStream(
      (url) => new EventSource(url),
      BASE_URL,
      result.runId,
      {
        onEvent: (event: PipelineEvent) => {
          timeline = applyEvent(timeline, event);
          renderTimeline(timeline);
        },
        onTerminal: () => void showResults(result.runId, graphView, topoView),
        onConnectionLoss: () => setTimeout(() => stream.reconnect(), 1000),
      },
    );
    stream.connect();
  });
}

document.addEventListener("DOMContentLoaded", main);
