// Topography scatter: cluster-colored points sized by marginalization,
// void midpoints, and isolation connectors.

import * as d3 from "d3";

import type { TopographyDoc } from "./types.js";

export const POINT_SIZE_RANGE: [number, number] = [4, 16];

/** Marginalization 0 maps to the smallest radius, 1 to the largest. */
export function pointRadius(marginalization: number): number {
  const [lo, hi] = POINT_SIZE_RANGE;
  const clamped = Math.min(1, Math.max(0, marginalization));
  return lo + clamped * (hi - lo);
}

export function clusterColor(label: number): string {
  if (label < 0) return "#9aa0a6"; // noise is grey
  const palette = d3.schemeTableau10;
  return palette[label % palette.length];
}

export interface TopoDatum {
  id: string;
  x: number;
  y: number;
  label: number;
  radius: number;
}

export function topoData(doc: TopographyDoc, titles?: Map<string, string>): TopoDatum[] {
  return doc.paper_ids.map((id, index) => ({
    id,
    x: doc.points[index][0],
    y: doc.points[index][1],
    label: doc.cluster_labels[index],
    radius: pointRadius(doc.marginalization[id] ?? 0),
    title: titles?.get(id) ?? id,
  })) as TopoDatum[];
}

export class TopographyView {
  constructor(
    private readonly container: SVGSVGElement,
    private readonly width = 900,
    private readonly height = 520,
  ) {}

  renderUnavailable(status: string): void {
    const svg = d3.select(this.container);
    svg.selectAll("*").remove();
    svg
      .append("text")
      .attr("x", this.width / 2)
      .attr("y", this.height / 2)
      .attr("text-anchor", "middle")
      .attr("class", "empty-state")
      .text(`topography ${status}`);
  }

  render(doc: TopographyDoc, titles?: Map<string, string>): void {
    const svg = d3.select(this.container);
    svg.selectAll("*").remove();
    svg.attr("viewBox", `0 0 ${this.width} ${this.height}`);
    const data = topoData(doc, titles);
    const pad = 30;
    const xExtent = d3.extent(data, (d) => d.x) as [number, number];
    const yExtent = d3.extent(data, (d) => d.y) as [number, number];
    const x = d3.scaleLinear().domain(padded(xExtent)).range([pad, this.width - pad]);
    const y = d3.scaleLinear().domain(padded(yExtent)).range([this.height - pad, pad]);

    const centroids = new Map(
      doc.clusters.map((c) => [c.label, [x(c.centroid_2d[0]), y(c.centroid_2d[1])]] as const),
    );

    // Isolation connectors under everything else.
    svg
      .append("g")
      .selectAll("line")
      .data(doc.isolations)
      .join("line")
      .attr("class", "isolation-link")
      .attr("x1", (d) => centroids.get(d.cluster_pair[0])![0])
      .attr("y1", (d) => centroids.get(d.cluster_pair[0])![1])
      .attr("x2", (d) => centroids.get(d.cluster_pair[1])![0])
      .attr("y2", (d) => centroids.get(d.cluster_pair[1])![1])
      .append("title")
      .text((d) => `orthogonal isolation: jaccard ${d.vocab_jaccard.toFixed(2)}`);

    svg
      .append("g")
      .selectAll("circle")
      .data(data)
      .join("circle")
      .attr("cx", (d) => x(d.x))
      .attr("cy", (d) => y(d.y))
      .attr("r", (d) => d.radius)
      .attr("fill", (d) => clusterColor(d.label))
      .attr("class", "topo-point")
      .append("title")
      .text((d: any) => `${d.title} (marginalization ${((d.radius - 4) / 12).toFixed(2)})`);

    // Void markers at recorded midpoints.
    svg
      .append("g")
      .selectAll("path")
      .data(doc.voids)
      .join("path")
      .attr("class", "void-marker")
      .attr("transform", (d) => `translate(${x(d.midpoint_2d[0])},${y(d.midpoint_2d[1])})`)
      .attr("d", d3.symbol(d3.symbolCross, 140))
      .append("title")
      .text((d) => `semantic void (gap ratio ${d.gap_ratio.toFixed(1)})`);
  }
}

function padded([lo, hi]: [number, number]): [number, number] {
  if (lo === hi) return [lo - 1, hi + 1];
  const margin = (hi - lo) * 0.05;
  return [lo - margin, hi + margin];
}
