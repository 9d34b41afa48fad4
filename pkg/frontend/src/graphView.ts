// Force-directed rhizome map. Layout is seedable: nodes start at
// hash-derived positions and the simulation ticks a fixed number of times
// synchronously, so the same document renders the same picture.

import * as d3 from "d3";

import { styleForEdge, visibleEdges, type ClassFilter } from "./edgeStyle.js";
import type { GraphDoc, PaperSummary, RelationEdge } from "./types.js";

export interface LayoutNode extends d3.SimulationNodeDatum {
  id: string;
  heterodox: boolean;
}

export interface LayoutLink extends d3.SimulationLinkDatum<LayoutNode> {
  edge: RelationEdge;
}

export function hashUnit(text: string, salt: string): number {
  let h = 2166136261;
  const input = `${salt}|${text}`;
  for (let i = 0; i < input.length; i++) {
    h ^= input.charCodeAt(i);
    h = Math.imul(h, 16777619);
  }
  return (h >>> 0) / 4294967296;
}

export function seededPositions(
  graph: GraphDoc,
  width: number,
  height: number,
): LayoutNode[] {
  return graph.nodes.map((node) => ({
    id: node.id,
    heterodox: node.heterodox_flag,
    x: hashUnit(node.id, "x") * width,
    y: hashUnit(node.id, "y") * height,
  }));
}

export function computeLayout(
  graph: GraphDoc,
  width = 900,
  height = 600,
  ticks = 200,
): { nodes: LayoutNode[]; links: LayoutLink[] } {
  const nodes = seededPositions(graph, width, height);
  const byId = new Map(nodes.map((n) => [n.id, n]));
  const links: LayoutLink[] = graph.edges.map((edge) => ({
    source: byId.get(edge.from_id)!,
    target: byId.get(edge.to_id)!,
    edge,
  }));
  const simulation = d3
    .forceSimulation(nodes)
    .force("charge", d3.forceManyBody().strength(-120))
    .force("link", d3.forceLink(links).distance(70).strength(0.4))
    .force("center", d3.forceCenter(width / 2, height / 2))
    .force("collide", d3.forceCollide(14))
    .stop();
  for (let i = 0; i < ticks; i++) simulation.tick();
  return { nodes, links };
}

export interface GraphViewOptions {
  width?: number;
  height?: number;
  onSelect?: (paper: PaperSummary | undefined, nodeId: string) => void;
  papers?: Map<string, PaperSummary>;
}

export class GraphView {
  private filters: ClassFilter = new Set(["constructive", "critical", "rhizomatic"]);
  private graph: GraphDoc | null = null;
  private readonly width: number;
  private readonly height: number;

  constructor(
    private readonly container: SVGSVGElement,
    private readonly options: GraphViewOptions = {},
  ) {
    this.width = options.width ?? 900;
    this.height = options.height ?? 600;
  }

  setClassFilter(edgeClass: string, enabled: boolean): void {
    if (enabled) this.filters.add(edgeClass);
    else this.filters.delete(edgeClass);
    if (this.graph) this.render(this.graph);
  }

  render(graph: GraphDoc): void {
    this.graph = graph;
    const svg = d3.select(this.container);
    svg.selectAll("*").remove();
    svg.attr("viewBox", `0 0 ${this.width} ${this.height}`);
    if (graph.nodes.length === 0) {
      svg
        .append("text")
        .attr("x", this.width / 2)
        .attr("y", this.height / 2)
        .attr("text-anchor", "middle")
        .attr("class", "empty-state")
        .text("no graph yet: the run has not classified any relations");
      return;
    }
    const { nodes, links } = computeLayout(graph, this.width, this.height);
    const shown = new Set(visibleEdges(graph.edges, this.filters));
    const line = svg
      .append("g")
      .selectAll("line")
      .data(links.filter((l) => shown.has(l.edge)))
      .join("line")
      .attr("x1", (d) => (d.source as LayoutNode).x!)
      .attr("y1", (d) => (d.source as LayoutNode).y!)
      .attr("x2", (d) => (d.target as LayoutNode).x!)
      .attr("y2", (d) => (d.target as LayoutNode).y!);
    line.each(function (d) {
      const style = styleForEdge(d.edge);
      const element = d3.select(this);
      element.attr("class", style.cssClass).attr("stroke-width", style.strokeWidth);
      if (style.dasharray) element.attr("stroke-dasharray", style.dasharray);
      element.append("title").text(`${d.edge.subtype}: ${d.edge.justification}`);
    });
    const node = svg
      .append("g")
      .selectAll("circle")
      .data(nodes)
      .join("circle")
      .attr("r", 9)
      .attr("cx", (d) => d.x!)
      .attr("cy", (d) => d.y!)
      .attr("class", (d) => (d.heterodox ? "node node-heterodox" : "node"))
      .on("click", (_event, d) => {
        this.options.onSelect?.(this.options.papers?.get(d.id), d.id);
      });
    node.append("title").text((d) => {
      const paper = this.options.papers?.get(d.id);
      return paper ? paper.title : d.id;
    });
  }
}

export function paperDetailHtml(paper: PaperSummary, tensions: string[]): string {
  const badge = paper.heterodox_flag
    ? '<span class="badge badge-heterodox">heterodox</span>'
    : "";
  const rank = paper.abs_rank
    ? `<span class="badge badge-rank">ABS ${paper.abs_rank}</span>`
    : "";
  const tensionItems = tensions.map((t) => `<li>${escapeHtml(t)}</li>`).join("");
  return [
    `<h3>${escapeHtml(paper.title)} ${badge} ${rank}</h3>`,
    `<p>${escapeHtml(paper.venue ?? "no venue")} · ${paper.year ?? "n.d."} · ${paper.source}</p>`,
    tensionItems ? `<h4>lens tensions</h4><ul>${tensionItems}</ul>` : "",
  ].join("\n");
}

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}
