/** Payload shapes of the curation HTTP API. */

export interface ColumnDef {
  name: string;
  example_hint?: string;
}

export interface DocumentSummary {
  doc_id: string;
  source_uri: string;
  status: "pending" | "ingested" | "failed";
  position: number;
}

export interface SampleSummary {
  batch_id: number;
  phase: "pilot" | "batch";
  position: number;
  pool_version_used: number;
  created_at: string;
}

export interface Project {
  project_id: number;
  name: string;
  schema: ColumnDef[];
  retired_columns: string[];
  pool_version: number;
  documents: DocumentSummary[];
  samples: SampleSummary[];
}

export interface Provenance {
  ratio: number;
  band: "supported" | "partial" | "unsupported";
  span: [number, number] | null;
}

export interface CellPayload {
  value: string;
  edited: boolean;
  provenance: Provenance | null;
}

export interface AltPayload {
  values: Record<string, string>;
  origin: string | null;
  score: number | null;
}

export type RecordStatus = "generated" | "edited" | "locked" | "irrelevant";

export interface RecordPayload {
  record_id: number;
  project_id: number;
  batch_id: number;
  doc_id: string;
  origin: string;
  status: RecordStatus;
  cells: Record<string, CellPayload>;
  generated_values: Record<string, string>;
  alt: AltPayload | null;
  version: number;
}

export interface Batch {
  batch_id: number;
  project_id: number;
  phase: "pilot" | "batch";
  position: number;
  doc_ids: string[];
  failures: Record<string, string>;
  pool_version_used: number;
  created_at: string;
  records: RecordPayload[];
}

export interface SupportParagraph {
  index: number;
  score: number;
  text: string;
  highlighted: string;
}

export interface SupportResponse {
  record_id: number;
  column: string;
  paragraphs: SupportParagraph[];
}

export interface ProvenanceResponse {
  record_id: number;
  cells: Record<string, Provenance | null>;
}

export interface ExplainResponse {
  record_id: number;
  column: string;
  explanation: string;
}

export interface LockResponse {
  record: RecordPayload;
  pool_version: number;
}

export interface AuditEvent {
  event_id: number;
  project_id: number;
  actor: string;
  kind: string;
  record_id: number | null;
  column_name: string | null;
  before_value: string | null;
  after_value: string | null;
  created_at: string;
}

export interface ApiError {
  error: string;
  message: string;
}
