import type {
  DocumentPayload,
  InterventionsPayload,
  Job,
  SummaryPayload,
  TaxonomyDoc,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin typed client over the documented endpoints. Configuration is a
 * base URL; an injectable fetch makes tests and recording trivial. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let resp: Response;
    try {
      resp = await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError("network_error", `request to ${path} failed: ${err}`, 0);
    }
    if (!resp.ok) {
      let code = "http_error";
      let message = `HTTP ${resp.status}`;
      try {
        const body = (await resp.json()) as { code?: string; message?: string };
        if (body.code) code = body.code;
        if (body.message) message = body.message;
      } catch {
        // non-JSON error body; keep the generic message
      }
      throw new ApiError(code, message, resp.status);
    }
    return (await resp.json()) as T;
  }

  uploadText(text: string, date?: string): Promise<{ job_id: string }> {
    return this.request("/api/upload/text", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text, ...(date ? { date } : {}) }),
    });
  }

  uploadUrl(url: string): Promise<{ job_id: string }> {
    return this.request("/api/upload/url", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ url }),
    });
  }

  uploadFile(file: File, format: string): Promise<{ job_id: string }> {
    const form = new FormData();
    form.append("file", file);
    form.append("format", format);
    return this.request("/api/upload/file", { method: "POST", body: form });
  }

  getJob(jobId: string): Promise<Job> {
    return this.request(`/api/jobs/${encodeURIComponent(jobId)}`);
  }

  getDocument(docId: string): Promise<DocumentPayload> {
    return this.request(`/api/documents/${encodeURIComponent(docId)}`);
  }

  getSummary(jobId: string): Promise<SummaryPayload> {
    return this.request(`/api/summary/${encodeURIComponent(jobId)}`);
  }

  getTaxonomy(): Promise<TaxonomyDoc> {
    return this.request("/api/taxonomy");
  }

  queryInterventions(text: string): Promise<InterventionsPayload> {
    return this.request("/api/interventions/query", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text }),
    });
  }
}
