/**
 * Typed client for the curation service. Every server interaction in the UI
 * goes through this module, and it only speaks the documented endpoints.
 */

import type {
  AuditEvent,
  Batch,
  ExplainResponse,
  LockResponse,
  Project,
  ProvenanceResponse,
  RecordPayload,
  SupportResponse,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class RequestError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

/** Thrown when the transport itself fails (offline, refused, DNS). */
export class NetworkError extends Error {}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
    private actor: string = "curator",
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, {
        method,
        headers: { "Content-Type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new NetworkError(String(err));
    }
    if (!response.ok) {
      let code = "http_error";
      let message = `HTTP ${response.status}`;
      try {
        const payload = (await response.json()) as { error?: string; message?: string };
        code = payload.error ?? code;
        message = payload.message ?? message;
      } catch {
        // non-JSON error body; keep defaults
      }
      throw new RequestError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  getProject(projectId: number): Promise<Project> {
    return this.request("GET", `/projects/${projectId}`);
  }

  runBatch(projectId: number, phase: "pilot" | "batch", docIds: string[]): Promise<Batch> {
    return this.request("POST", `/projects/${projectId}/batches`, {
      phase,
      doc_ids: docIds,
    });
  }

  getBatch(batchId: number): Promise<Batch> {
    return this.request("GET", `/batches/${batchId}`);
  }

  editCell(recordId: number, column: string, value: string): Promise<RecordPayload> {
    return this.request("PATCH", `/records/${recordId}/cells/${encodeURIComponent(column)}`, {
      value,
      actor: this.actor,
    });
  }

  lockRecord(recordId: number): Promise<LockResponse> {
    return this.request("POST", `/records/${recordId}/lock`, { actor: this.actor });
  }

  markIrrelevant(recordId: number): Promise<RecordPayload> {
    return this.request("POST", `/records/${recordId}/irrelevant`, { actor: this.actor });
  }

  getProvenance(recordId: number): Promise<ProvenanceResponse> {
    return this.request("GET", `/records/${recordId}/provenance?actor=${this.actor}`);
  }

  getSupport(recordId: number, column: string, k = 3): Promise<SupportResponse> {
    const q = `column=${encodeURIComponent(column)}&k=${k}&actor=${this.actor}`;
    return this.request("GET", `/records/${recordId}/support?${q}`);
  }

  explain(recordId: number, column: string): Promise<ExplainResponse> {
    return this.request("POST", `/records/${recordId}/explain`, {
      column,
      actor: this.actor,
    });
  }

  async exportProject(projectId: number, format: "csv" | "json"): Promise<string> {
    let response: Response;
    try {
      response = await this.fetchImpl(
        `${this.baseUrl}/projects/${projectId}/export?format=${format}`,
        { method: "GET" },
      );
    } catch (err) {
      throw new NetworkError(String(err));
    }
    if (!response.ok) {
      throw new RequestError(response.status, "export_failed", `HTTP ${response.status}`);
    }
    return response.text();
  }

  getAudit(projectId: number): Promise<{ events: AuditEvent[] }> {
    return this.request("GET", `/projects/${projectId}/audit`);
  }
}
