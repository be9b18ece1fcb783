// REST client for the runtime's HTTP facade.

import {
  AnalysisReport,
  GraphDoc,
  MutationResponse,
  Scalar,
  TraceDoc,
  ViewState,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public kind: string,
    detail: string,
  ) {
    super(detail);
  }
}

async function asJson<T>(res: Response): Promise<T> {
  const body = await res.json().catch(() => ({}));
  if (!res.ok) {
    throw new ApiError(
      res.status,
      (body as { error?: string }).error ?? "HttpError",
      (body as { detail?: string }).detail ?? res.statusText,
    );
  }
  return body as T;
}

export class ApiClient {
  constructor(
    private base = "",
    private fetcher: typeof fetch = fetch,
  ) {}

  url(path: string): string {
    return this.base.replace(/\/$/, "") + path;
  }

  viewUrl(name: string): string {
    return this.url(`/api/views/${encodeURIComponent(name)}`);
  }

  actionUrl(individual: string, action: string): string {
    return this.url(
      `/api/individuals/${encodeURIComponent(individual)}/actions/${encodeURIComponent(action)}`,
    );
  }

  propertyUrl(individual: string, prop: string): string {
    return this.url(
      `/api/individuals/${encodeURIComponent(individual)}/properties/${encodeURIComponent(prop)}`,
    );
  }

  eventsUrl(since: string | null, limit?: number): string {
    const params = new URLSearchParams();
    if (since) params.set("since", since);
    if (limit !== undefined) params.set("limit", String(limit));
    const query = params.toString();
    return this.url(`/api/events${query ? `?${query}` : ""}`);
  }

  async getView(name: string): Promise<ViewState> {
    return asJson(await this.fetcher(this.viewUrl(name)));
  }

  async trigger(
    individual: string,
    action: string,
    value: Scalar = 1,
  ): Promise<MutationResponse> {
    return asJson(
      await this.fetcher(this.actionUrl(individual, action), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ value }),
      }),
    );
  }

  async setProperty(
    individual: string,
    prop: string,
    value: Scalar,
  ): Promise<MutationResponse> {
    return asJson(
      await this.fetcher(this.propertyUrl(individual, prop), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ value }),
      }),
    );
  }

  async getTrace(eventId: string, depth = 10): Promise<TraceDoc> {
    return asJson(
      await this.fetcher(
        this.url(`/api/trace/${encodeURIComponent(eventId)}?depth=${depth}`),
      ),
    );
  }

  async getAnalysis(): Promise<AnalysisReport> {
    return asJson(await this.fetcher(this.url("/api/analysis")));
  }

  async loadBsl(text: string): Promise<AnalysisReport> {
    return asJson(
      await this.fetcher(this.url("/api/load"), {
        method: "POST",
        headers: { "Content-Type": "text/plain" },
        body: text,
      }),
    );
  }

  async getGraph(): Promise<GraphDoc> {
    return asJson(await this.fetcher(this.url("/api/graph")));
  }
}
