// Wire types mirroring the pipeline's REST/SSE documents.

export type EdgeClass = "constructive" | "critical" | "rhizomatic";
export type RenderHint = "solid" | "dashed" | "neon";

export interface RelationEdge {
  from_id: string;
  to_id: string;
  edge_class: EdgeClass;
  subtype: string;
  justification: string;
  confidence: number;
  render_hint: RenderHint;
}

export interface GraphNode {
  id: string;
  heterodox_flag: boolean;
}

export interface GraphDoc {
  nodes: GraphNode[];
  edges: RelationEdge[];
}

export interface PipelineEvent {
  run_id: string;
  sequence: number;
  phase: string | null;
  kind: string;
  payload: Record<string, any>;
  timestamp: number;
}

export interface PaperSummary {
  id: string;
  title: string;
  venue: string | null;
  abs_rank: string | null;
  heterodox_flag: boolean;
  year: number | null;
  source: string;
}

export interface SemanticCluster {
  label: number;
  member_ids: string[];
  centroid_2d: [number, number];
  rms_radius: number;
  top_terms: string[];
}

export interface SemanticVoid {
  cluster_pair: [number, number];
  midpoint_2d: [number, number];
  gap_ratio: number;
}

export interface OrthogonalIsolation {
  cluster_pair: [number, number];
  vocab_jaccard: number;
  centroid_distance: number;
}

export interface TopographyDoc {
  paper_ids: string[];
  points: [number, number][];
  cluster_labels: number[];
  clusters: SemanticCluster[];
  voids: SemanticVoid[];
  isolations: OrthogonalIsolation[];
  marginalization: Record<string, number>;
  model_name: string;
}

export interface TopographyResponse {
  status: string;
  topography: TopographyDoc | null;
}

export interface RunForm {
  zone: string;
  per_source_limit: number;
  max_reentries: number;
  centralization_threshold: number;
  provider_kind: "fixture" | "live-http";
  fixture_path?: string;
  endpoint?: string;
}

export interface FieldError {
  field: string;
  reason: string;
}
