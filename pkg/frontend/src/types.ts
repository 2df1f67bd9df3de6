/** Payload shapes of the concernlens HTTP API (the server is authoritative;
 * the UI never derives labels, rankings, or highlights on its own). */

export interface Job {
  job_id: string;
  kind: string;
  state: "queued" | "running" | "done" | "failed";
  progress: number;
  result: { doc_ids?: string[]; [key: string]: unknown } | null;
  error: string | null;
}

export interface TaxonomyNode {
  id: string;
  name: string;
  definition: string;
}

export interface TaxonomyDoc {
  version: string;
  nodes: TaxonomyNode[];
}

export interface PassagePayload {
  passage_id: string;
  start: number;
  end: number;
  scores: number[];
  labels: number[];
}

export interface DocumentPayload {
  doc_id: string;
  published_at: string | null;
  article_labels: number[];
  passages: PassagePayload[];
  raw_text: string;
  node_ids: string[];
}

export interface SummaryExample {
  doc_id: string;
  passage_id: string;
  start: number;
  end: number;
  text: string;
  score: number;
}

export interface ConcernSummary {
  id: string;
  name: string;
  count: number;
  examples: SummaryExample[];
  cloud: [string, number][];
}

export interface SummaryPayload {
  job_id: string;
  concerns: ConcernSummary[];
}

export interface InterventionMatch {
  id: string;
  title: string;
  audience: "patient" | "expert";
  url: string | null;
  labels: string[];
  score: number;
}

export interface InterventionsPayload {
  detected: string[];
  no_concerns: boolean;
  matches: InterventionMatch[];
}

export interface ApiErrorBody {
  code: string;
  message: string;
}
