import type {
  ExportLine,
  Label,
  PendingFilter,
  PendingPage,
  SourceSummary,
  TriageResponse,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

const defaultFetch: FetchLike = (input, init) => fetch(input, init);

/** Thin client for the documented review endpoints; fetch is injectable. */
export class ReviewApi {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = defaultFetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.base}${path}`, init);
    } catch (err) {
      throw new ApiError(0, `network error: ${String(err)}`);
    }
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.error === "string") detail = body.error;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return response;
  }

  async pending(page: number, size: number, filter: PendingFilter): Promise<PendingPage> {
    const query = `page=${page}&size=${size}&filter=${filter}`;
    const response = await this.request(`/api/pending?${query}`);
    return (await response.json()) as PendingPage;
  }

  async submitLabel(id: string, label: Label, annotator: string): Promise<void> {
    await this.request("/api/label", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ id, label, annotator }),
    });
  }

  async triage(source?: string): Promise<TriageResponse> {
    const suffix = source ? `?source=${encodeURIComponent(source)}` : "";
    const response = await this.request(`/api/triage${suffix}`);
    return (await response.json()) as TriageResponse;
  }

  async sources(): Promise<SourceSummary[]> {
    const response = await this.request("/api/sources");
    return (await response.json()) as SourceSummary[];
  }

  async exportLabels(): Promise<ExportLine[]> {
    const response = await this.request("/api/export");
    const text = await response.text();
    return text
      .split("\n")
      .filter((line) => line.trim().length > 0)
      .map((line) => JSON.parse(line) as ExportLine);
  }

  cropUrl(id: string): string {
    return `${this.base}/api/crop/${id}`;
  }
}
