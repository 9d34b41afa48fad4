import { describe, expect, it } from "vitest";

import { styleForEdge, styleForHint, visibleEdges } from "../src/edgeStyle.js";
import type { GraphDoc, RelationEdge } from "../src/types.js";

import graphFixture from "./fixtures/graph.json";

const graph = graphFixture as unknown as GraphDoc;

describe("edge styling", () => {
  it("three visually distinct styles", () => {
    const solid = styleForHint("solid");
    const dashed = styleForHint("dashed");
    const neon = styleForHint("neon");
    const signatures = [solid, dashed, neon].map(
      (s) => `${s.cssClass}|${s.dasharray}|${s.glow}`,
    );
    expect(new Set(signatures).size).toBe(3);
    expect(dashed.dasharray).not.toBeNull();
    expect(solid.dasharray).toBeNull();
    expect(neon.glow).toBe(true);
  });

  it("style is driven solely by render_hint, never re-derived from class", () => {
    // A deliberately inconsistent edge: whatever the class says, the hint wins.
    const weird: RelationEdge = {
      from_id: "a",
      to_id: "b",
      edge_class: "critical",
      subtype: "contradicts",
      justification: "x",
      confidence: 0.5,
      render_hint: "neon",
    };
    expect(styleForEdge(weird)).toEqual(styleForHint("neon"));
  });

  it("the recorded run exercises all three hints and maps them 1:1", () => {
    const hintsByClass = new Map<string, Set<string>>();
    for (const edge of graph.edges) {
      const set = hintsByClass.get(edge.edge_class) ?? new Set();
      set.add(edge.render_hint);
      hintsByClass.set(edge.edge_class, set);
    }
    expect([...hintsByClass.keys()].sort()).toEqual([
      "constructive",
      "critical",
      "rhizomatic",
    ]);
    for (const hints of hintsByClass.values()) {
      expect(hints.size).toBe(1);
    }
    expect(hintsByClass.get("constructive")!.has("solid")).toBe(true);
    expect(hintsByClass.get("critical")!.has("dashed")).toBe(true);
    expect(hintsByClass.get("rhizomatic")!.has("neon")).toBe(true);
  });

  it("class filters hide the other classes", () => {
    const criticalOnly = visibleEdges(graph.edges, new Set(["critical"]));
    expect(criticalOnly.length).toBeGreaterThan(0);
    expect(criticalOnly.every((e) => e.edge_class === "critical")).toBe(true);
    const none = visibleEdges(graph.edges, new Set());
    expect(none).toEqual([]);
  });
});
