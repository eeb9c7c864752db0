/** Payload shapes served by the annotation API. */

export type NodeType = "director" | "company" | "address" | "owner";

export interface GraphNode {
  id: string;
  type: NodeType;
  name?: string;
  corporate?: boolean;
  legal_form?: string;
  nace?: string;
  street?: string;
  city?: string;
  postcode?: string;
  number?: string;
  country?: string;
}

export interface GraphEdge {
  source: string;
  target: string;
  kind: "directorship" | "located_at" | "owned_by";
  status?: string;
  title?: string | null;
  address_type?: string;
}

export interface DirectorPayload {
  director_id: string;
  name: string;
  nodes: GraphNode[];
  edges: GraphEdge[];
  features_raw: Record<string, number> | null;
  features_robust: Record<string, number> | null;
  provenance: {
    knn: { support: number; flagged: boolean };
    logit: { probability: number | null; flagged_new: boolean };
    licensed: string | null;
  };
  offshore: { director: boolean; companies: string[] };
}

export interface QueueResponse {
  director_id: string | null;
  source: string;
  remaining: number;
}

export interface SourceEstimate {
  alpha: number;
  beta: number;
  n_candidates: number;
  source: string;
  median: number;
  ci95: [number, number];
}

export interface EstimateResponse {
  per_source: SourceEstimate[];
  combined: {
    sources: SourceEstimate[];
    n_mc: number;
    seed: number;
    median: number;
    ci95: [number, number];
  };
}

export interface LabelResponse {
  ok: boolean;
  label: string;
}
