/** Typed client for the annotation service HTTP API. */

export interface PendingVertex {
  id: number;
  x: number;
  y: number;
  prob: number;
}

export interface BinSummary {
  estimate: number;
  ci_low: number | null;
  ci_high: number | null;
  k: number;
}

export interface SessionResource {
  id: string;
  catalog: string;
  status: "awaiting-label" | "complete";
  pending: PendingVertex | null;
  labels_used: number;
  bins: Record<string, BinSummary>;
}

export interface EstimateRow {
  index: number;
  labels_used: number;
  k: number;
  estimate: number | null;
}

export interface EstimatesPage {
  bins: Record<string, EstimateRow[]>;
  next: number;
}

export interface BinSpec {
  edges?: number[];
  theta_min?: number;
  theta_max?: number;
  num_bins?: number;
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

type Fetch = typeof fetch;

/** Thin wrapper around fetch; every method resolves to parsed JSON or throws ApiError. */
export class Client {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: Fetch = fetch,
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await resp.text();
    if (!resp.ok) {
      let detail = text;
      try {
        detail = JSON.parse(text).detail ?? text;
      } catch {
        /* non-JSON error body: keep raw text */
      }
      throw new ApiError(resp.status, detail);
    }
    return JSON.parse(text) as T;
  }

  createSession(
    catalog: string,
    bins: BinSpec,
    seed: number,
  ): Promise<SessionResource> {
    return this.request("POST", "/sessions", { catalog, bins, seed });
  }

  getSession(id: string): Promise<SessionResource> {
    return this.request("GET", `/sessions/${id}`);
  }

  submitLabel(
    id: string,
    vertex: number,
    label: 0 | 1,
  ): Promise<SessionResource> {
    return this.request("POST", `/sessions/${id}/labels`, { vertex, label });
  }

  getEstimates(id: string, start = 0): Promise<EstimatesPage> {
    return this.request("GET", `/sessions/${id}/estimates?start=${start}`);
  }

  stopSession(id: string): Promise<SessionResource> {
    return this.request("POST", `/sessions/${id}/stop`);
  }
}
