// Typed client for the recommendation service.  All statistics (distances,
// epsilons, the safe/not-safe verdict) come from the backend; nothing in the
// UI recomputes them.

export interface Clause {
  op: string;
  value: number;
}

export interface FeatureDisjunction {
  feature: string;
  or: Clause[];
}

export interface Predicate {
  and: FeatureDisjunction[];
}

export interface Pmf {
  probs: number[];
  support: number;
  support_values: number[];
}

export interface Recommendation {
  predicate: Predicate;
  group_by: string;
  pmf: Pmf;
  distance: number;
  epsilon_ref: number;
  epsilon_cand: number;
  uncertainty: number;
  interest: number;
  safe: boolean;
  support: number;
  selectivity: number;
}

export interface ReferenceView {
  predicate: Predicate;
  group_by: string;
  pmf: Pmf;
}

export interface RecommendResponse {
  reference: ReferenceView;
  config: Record<string, unknown>;
  d: number;
  gamma_min: number;
  n_candidates: number;
  tarone_excluded: number;
  equivalence_merges: number;
  recommendations: Recommendation[];
}

export interface PmfResponse {
  predicate: Predicate;
  group_by: string;
  pmf: Pmf;
  support: number;
  cannot_be_safe: boolean;
  epsilon: Record<string, number>;
}

export interface DatasetHandle {
  id: string;
  name: string;
  n: number;
  d: number;
  gamma_min: number;
  schema: Record<string, string>;
  preprocess: Record<string, unknown>;
}

export interface RecommendRequest {
  group_by: string;
  reference?: Predicate;
  delta?: number;
  eps_v?: number;
  one_sample?: boolean;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function raiseForStatus(res: Response): Promise<void> {
  if (res.ok) return;
  let code = "unknown";
  let message = `HTTP ${res.status}`;
  try {
    const body = await res.json();
    code = body.error ?? code;
    message = body.message ?? message;
  } catch {
    // non-JSON error body; keep the generic message
  }
  throw new ApiError(res.status, code, message);
}

export class ServiceClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  async uploadDataset(file: File, config: Record<string, unknown>): Promise<DatasetHandle> {
    const form = new FormData();
    form.append("file", file);
    form.append("config", JSON.stringify(config));
    const res = await this.fetchImpl(`${this.baseUrl}/datasets`, {
      method: "POST",
      body: form,
    });
    await raiseForStatus(res);
    return res.json();
  }

  async listDatasets(): Promise<DatasetHandle[]> {
    const res = await this.fetchImpl(`${this.baseUrl}/datasets`);
    await raiseForStatus(res);
    return res.json();
  }

  async recommend(datasetId: string, req: RecommendRequest): Promise<RecommendResponse> {
    const res = await this.fetchImpl(`${this.baseUrl}/datasets/${datasetId}/recommend`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
    });
    await raiseForStatus(res);
    return res.json();
  }

  async pmf(datasetId: string, groupBy: string, predicate: Predicate): Promise<PmfResponse> {
    const params = new URLSearchParams({
      group_by: groupBy,
      predicate: JSON.stringify(predicate),
    });
    const res = await this.fetchImpl(`${this.baseUrl}/datasets/${datasetId}/pmf?${params}`);
    await raiseForStatus(res);
    return res.json();
  }
}
