// Edge visuals are a pure function of the document's render_hint field.
// The UI never re-derives style from edge_class: whatever hint the server
// recorded is what gets drawn.

import type { RelationEdge, RenderHint } from "./types.js";

export interface EdgeStyle {
  cssClass: string;
  dasharray: string | null;
  strokeWidth: number;
  glow: boolean;
}

const STYLES: Record<RenderHint, EdgeStyle> = {
  solid: { cssClass: "edge-solid", dasharray: null, strokeWidth: 1.6, glow: false },
  dashed: { cssClass: "edge-dashed", dasharray: "6,4", strokeWidth: 1.6, glow: false },
  neon: { cssClass: "edge-neon", dasharray: null, strokeWidth: 2.6, glow: true },
};

export function styleForHint(hint: RenderHint): EdgeStyle {
  return STYLES[hint];
}

export function styleForEdge(edge: RelationEdge): EdgeStyle {
  return styleForHint(edge.render_hint);
}

export type ClassFilter = Set<string>;

export function visibleEdges(edges: RelationEdge[], enabled: ClassFilter): RelationEdge[] {
  return edges.filter((edge) => enabled.has(edge.edge_class));
}
