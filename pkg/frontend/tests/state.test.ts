import { describe, expect, it } from "vitest";

import { ClusterView } from "../src/api.js";
import {
  INITIAL_RETRY_MS,
  MAX_RETRY_MS,
  applyClusterPage,
  applySubmission,
  applySyncFailure,
  initialState,
  summarize,
} from "../src/state.js";

function view(id: number, lastUpdated: string, texts: string[] = ["x"]): ClusterView {
  return {
    community_id: id,
    claims: texts.map((text, i) => ({
      id: `a${id}:s${i}`,
      text,
      article_id: `a${id}`,
      detection_score: 0.9,
      factchecked: false,
    })),
    factchecks: [],
    last_updated: lastUpdated,
  };
}

describe("summaries", () => {
  it("counts size and factcheck coverage", () => {
    const v = view(3, "t1", ["a", "b", "c"]);
    v.claims[1].factchecked = true;
    v.factchecks.push({ verdict: "false", note: "", checked_at: "t1", source_claim_id: "a3:s1" });
    const s = summarize(v, false);
    expect(s.size).toBe(3);
    expect(s.factcheckedCount).toBe(1);
    expect(s.verdicts).toEqual(["false"]);
  });
});

describe("sync folding", () => {
  it("first sync never marks anything changed", () => {
    const next = applyClusterPage(initialState(), [view(0, "t1")], 1, "now");
    expect(next.clusters.map((c) => c.changed)).toEqual([false]);
    expect(next.lastSync).toBe("now");
  });

  it("marks clusters whose last_updated moved, and new clusters", () => {
    let state = applyClusterPage(initialState(), [view(0, "t1"), view(1, "t1")], 2, "s1");
    state = applyClusterPage(state, [view(0, "t1"), view(1, "t2"), view(2, "t1")], 3, "s2");
    const changed = Object.fromEntries(state.clusters.map((c) => [c.communityId, c.changed]));
    expect(changed).toEqual({ 0: false, 1: true, 2: true });
  });

  it("successful sync clears offline and resets backoff", () => {
    let state = applySyncFailure(applySyncFailure(initialState()));
    expect(state.offline).toBe(true);
    expect(state.retryDelayMs).toBe(INITIAL_RETRY_MS * 4);
    state = applyClusterPage(state, [], 0, "s1");
    expect(state.offline).toBe(false);
    expect(state.retryDelayMs).toBe(INITIAL_RETRY_MS);
  });

  it("backoff doubles up to the cap", () => {
    let state = initialState();
    for (let i = 0; i < 20; i++) state = applySyncFailure(state);
    expect(state.retryDelayMs).toBe(MAX_RETRY_MS);
  });
});

describe("submission", () => {
  it("clears the pending text only on success", () => {
    const state = { ...initialState(), pendingText: "typed claim" };
    const next = applySubmission(state, {
      report: {
        claim_id: "submitted:0",
        new_edges: 0,
        community_id: 9,
        subgraph_size: 1,
        elapsed_ms: 1,
        budget_exceeded: false,
        merged_communities: [],
      },
      community: view(9, "t1", ["typed claim"]),
      similar_factchecked: [],
    });
    expect(next.pendingText).toBe("");
    expect(next.selected?.community_id).toBe(9);
  });
});
