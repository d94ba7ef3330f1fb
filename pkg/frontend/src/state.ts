// Board state and the pure transition functions the views are rendered from.
// Every field originates from an API response; refreshing from scratch always
// reconstructs the same view (no client-side clustering or derived structure).

import {
  ApiError,
  ClusterView,
  ServiceClient,
  SimilarClaim,
  SubmitResponse,
} from "./api.js";

export interface ClusterSummary {
  communityId: number;
  size: number;
  factcheckedCount: number;
  verdicts: string[];
  lastUpdated: string;
  changed: boolean; // updated since the previous successful sync
}

export interface ClusterBoardState {
  clusters: ClusterSummary[];
  total: number;
  offset: number;
  limit: number;
  selected: ClusterView | null;
  similar: SimilarClaim[];
  pendingText: string;
  lastSync: string | null;
  offline: boolean;
  retryDelayMs: number;
  notice: string | null; // inline error / stale-view message
}

export const INITIAL_RETRY_MS = 1000;
export const MAX_RETRY_MS = 30_000;

export function initialState(): ClusterBoardState {
  return {
    clusters: [],
    total: 0,
    offset: 0,
    limit: 50,
    selected: null,
    similar: [],
    pendingText: "",
    lastSync: null,
    offline: false,
    retryDelayMs: INITIAL_RETRY_MS,
    notice: null,
  };
}

export function summarize(view: ClusterView, changed: boolean): ClusterSummary {
  return {
    communityId: view.community_id,
    size: view.claims.length,
    factcheckedCount: view.claims.filter((c) => c.factchecked).length,
    verdicts: view.factchecks.map((f) => f.verdict),
    lastUpdated: view.last_updated,
    changed,
  };
}

/** Fold a fresh /clusters page into the board, marking clusters whose
 * last_updated moved past the previous sync (or that are new). */
export function applyClusterPage(
  state: ClusterBoardState,
  clusters: ClusterView[],
  total: number,
  now: string,
): ClusterBoardState {
  const previous = new Map(state.clusters.map((c) => [c.communityId, c.lastUpdated]));
  const summaries = clusters.map((view) => {
    const before = previous.get(view.community_id);
    const changed = state.lastSync !== null && before !== view.last_updated;
    return summarize(view, changed);
  });
  return {
    ...state,
    clusters: summaries,
    total,
    lastSync: now,
    offline: false,
    retryDelayMs: INITIAL_RETRY_MS,
  };
}

export function applySyncFailure(state: ClusterBoardState): ClusterBoardState {
  return {
    ...state,
    offline: true,
    retryDelayMs: Math.min(state.retryDelayMs * 2, MAX_RETRY_MS),
  };
}

export function applySubmission(
  state: ClusterBoardState,
  resp: SubmitResponse,
): ClusterBoardState {
  return {
    ...state,
    selected: resp.community,
    similar: resp.similar_factchecked,
    pendingText: "", // only cleared on success; errors keep the typed text
    notice: null,
  };
}

export function applySubmissionError(
  state: ClusterBoardState,
  err: unknown,
): ClusterBoardState {
  const message = err instanceof ApiError ? err.detail : "service unreachable";
  return { ...state, notice: message };
}

export function applyClusterDetail(
  state: ClusterBoardState,
  view: ClusterView,
): ClusterBoardState {
  return { ...state, selected: view, notice: null };
}

/** A 404 on a verdict or detail fetch means our view went stale (the claim's
 * community merged away); surface that and drop the selection for a refresh. */
export function applyStaleView(state: ClusterBoardState): ClusterBoardState {
  return {
    ...state,
    selected: null,
    notice: "view was out of date and has been refreshed",
  };
}

export interface SyncResult {
  state: ClusterBoardState;
}

/** One poll tick: refresh the page of clusters and, if present, the selected
 * cluster detail. Failures flip the offline banner and grow the backoff. */
export async function syncBoard(
  client: ServiceClient,
  state: ClusterBoardState,
  now: () => string = () => new Date().toISOString(),
): Promise<ClusterBoardState> {
  try {
    const page = await client.listClusters(state.offset, state.limit);
    let next = applyClusterPage(state, page.clusters, page.total, now());
    if (state.selected !== null) {
      try {
        const detail = await client.cluster(state.selected.community_id);
        next = applyClusterDetail(next, detail);
      } catch (err) {
        if (err instanceof ApiError && err.status === 404) {
          next = applyStaleView(next);
        } else {
          throw err;
        }
      }
    }
    return next;
  } catch (err) {
    if (err instanceof ApiError) {
      // the service answered; this is not an outage
      return { ...state, notice: err.detail };
    }
    return applySyncFailure(state);
  }
}

export async function submitClaim(
  client: ServiceClient,
  state: ClusterBoardState,
): Promise<ClusterBoardState> {
  const text = state.pendingText.trim();
  if (!text) {
    return { ...state, notice: "claim text must be non-empty" };
  }
  try {
    const resp = await client.submitClaim(text);
    return applySubmission(state, resp);
  } catch (err) {
    return applySubmissionError(state, err);
  }
}

export async function attachVerdict(
  client: ServiceClient,
  state: ClusterBoardState,
  claimId: string,
  verdict: string,
  note: string,
): Promise<ClusterBoardState> {
  try {
    await client.attachFactcheck(claimId, verdict, note);
  } catch (err) {
    if (err instanceof ApiError && err.status === 404) {
      return applyStaleView(state);
    }
    return applySubmissionError(state, err);
  }
  if (state.selected === null) return state;
  // re-read the cluster so every sibling shows the inherited verdict
  const view = await client.cluster(state.selected.community_id);
  return applyClusterDetail(state, view);
}
