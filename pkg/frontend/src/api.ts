/**
 * Typed client for the postpick curation service. All reads and writes go
 * through here; the UI keeps no authoritative state of its own.
 */

export type Label = "particle" | "non_particle" | "unlabeled";
export type Source = "hand" | "simulator" | "prediction";
export type SampleState = "unlabeled" | "labeled" | "predicted";

export interface SampleRecord {
  id: number;
  path: string;
  label: Label;
  source: Source;
  timestamp: number | null;
}

export interface Page<T> {
  total: number;
  offset: number;
  items: T[];
}

export interface PredictionRecord {
  id: number | null;
  path: string;
  predicted: "particle" | "non_particle";
  margin: number;
  votes_particle: number;
}

export interface TrainJob {
  state: "running" | "done" | "failed";
  validation: { sensitivity: number | null; specificity: number | null } | null;
  error: string | null;
}

export interface MetricsReport {
  tp: number;
  fp: number;
  tn: number;
  fn: number;
  sensitivity: number | null;
  specificity: number | null;
  ppv: number | null;
  npv: number | null;
  accuracy: number | null;
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        detail = (await response.json()).detail ?? detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return response.json() as Promise<T>;
  }

  getSamples(state?: SampleState, offset = 0, limit = 50): Promise<Page<SampleRecord>> {
    const params = new URLSearchParams({ offset: String(offset), limit: String(limit) });
    if (state) params.set("state", state);
    return this.request(`/samples?${params}`);
  }

  getSample(id: number): Promise<SampleRecord> {
    return this.request(`/samples/${id}`);
  }

  imageUrl(id: number): string {
    return `${this.baseUrl}/image/${id}`;
  }

  postLabel(id: number, label: "particle" | "non_particle"): Promise<SampleRecord> {
    return this.request("/labels", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ id, label }),
    });
  }

  startTraining(k: number, seed: number): Promise<{ job_id: number }> {
    return this.request("/train", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ k, seed }),
    });
  }

  getTrainJob(jobId: number): Promise<TrainJob> {
    return this.request(`/train/${jobId}`);
  }

  classify(): Promise<{ count: number }> {
    return this.request("/classify", { method: "POST" });
  }

  getPredictions(
    sort?: "margin_asc",
    label?: "particle" | "non_particle",
    offset = 0,
    limit = 50,
  ): Promise<Page<PredictionRecord>> {
    const params = new URLSearchParams({ offset: String(offset), limit: String(limit) });
    if (sort) params.set("sort", sort);
    if (label) params.set("label", label);
    return this.request(`/predictions?${params}`);
  }

  getMetrics(): Promise<MetricsReport> {
    return this.request("/metrics");
  }
}
