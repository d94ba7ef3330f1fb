// Typed client for the claimgraph service HTTP API. Every record shape here
// mirrors the service's JSON responses verbatim; the UI never invents state.

export interface FactcheckRecord {
  verdict: string;
  note: string;
  checked_at: string;
  source_claim_id: string;
}

export interface ClusterClaim {
  id: string;
  text: string;
  article_id: string;
  detection_score: number;
  factchecked: boolean;
}

export interface ClusterView {
  community_id: number;
  claims: ClusterClaim[];
  factchecks: FactcheckRecord[];
  last_updated: string;
}

export interface ClusterPage {
  clusters: ClusterView[];
  total: number;
  offset: number;
  limit: number;
}

export interface InsertionReport {
  claim_id: string;
  new_edges: number;
  community_id: number;
  subgraph_size: number;
  elapsed_ms: number;
  budget_exceeded: boolean;
  merged_communities: number[];
}

export interface SimilarClaim {
  claim_id: string;
  text: string;
  distance: number;
  factcheck: FactcheckRecord | null;
}

export interface SubmitResponse {
  report: InsertionReport;
  community: ClusterView;
  similar_factchecked: SimilarClaim[];
}

export interface Health {
  status: string;
  claims: number;
  clusters: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function parseResponse<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (typeof body?.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class ServiceClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async get<T>(path: string): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path);
    return parseResponse<T>(resp);
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return parseResponse<T>(resp);
  }

  health(): Promise<Health> {
    return this.get("/healthz");
  }

  listClusters(offset = 0, limit = 50): Promise<ClusterPage> {
    return this.get(`/clusters?offset=${offset}&limit=${limit}`);
  }

  cluster(communityId: number): Promise<ClusterView> {
    return this.get(`/clusters/${communityId}`);
  }

  submitClaim(text: string): Promise<SubmitResponse> {
    return this.post("/claims", { text });
  }

  attachFactcheck(
    claimId: string,
    verdict: string,
    note: string,
  ): Promise<{ claim_id: string; covered: number }> {
    return this.post(`/claims/${encodeURIComponent(claimId)}/factcheck`, {
      verdict,
      note,
    });
  }

  similar(claimId: string, k = 5): Promise<{ claim_id: string; results: SimilarClaim[] }> {
    return this.get(`/claims/${encodeURIComponent(claimId)}/similar?k=${k}`);
  }
}
