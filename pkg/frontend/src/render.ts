// Pure HTML rendering of the board state. Kept free of DOM APIs so views can
// be asserted as strings in tests; main.ts owns the actual document wiring.

import { ClusterView, SimilarClaim } from "./api.js";
import { ClusterBoardState, ClusterSummary } from "./state.js";

function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderOfflineBanner(state: ClusterBoardState): string {
  if (!state.offline) return "";
  const seconds = Math.round(state.retryDelayMs / 1000);
  return `<div class="banner offline" role="alert">Service unreachable — retrying in ${seconds}s</div>`;
}

export function renderNotice(state: ClusterBoardState): string {
  if (!state.notice) return "";
  return `<div class="banner notice">${escapeHtml(state.notice)}</div>`;
}

export function renderClusterRow(c: ClusterSummary): string {
  const classes = ["cluster-row"];
  if (c.changed) classes.push("changed");
  const coverage =
    c.verdicts.length > 0
      ? `<span class="badge verdict">${escapeHtml(c.verdicts[c.verdicts.length - 1])}</span>`
      : "";
  return (
    `<tr class="${classes.join(" ")}" data-cluster="${c.communityId}">` +
    `<td>#${c.communityId}</td>` +
    `<td>${c.size} claim${c.size === 1 ? "" : "s"}</td>` +
    `<td>${c.factcheckedCount} checked ${coverage}</td>` +
    `<td>${escapeHtml(c.lastUpdated)}</td>` +
    `</tr>`
  );
}

export function renderClusterList(state: ClusterBoardState): string {
  if (state.clusters.length === 0) {
    return `<div class="empty-state">No clusters yet — ingest an article or submit a claim.</div>`;
  }
  const rows = state.clusters.map(renderClusterRow).join("");
  return (
    `<table class="clusters"><thead><tr>` +
    `<th>cluster</th><th>size</th><th>factchecks</th><th>updated</th>` +
    `</tr></thead><tbody>${rows}</tbody></table>` +
    `<div class="pager">${state.clusters.length} of ${state.total} clusters</div>`
  );
}

export function renderClusterDetail(view: ClusterView): string {
  // every claim in the community inherits the community's verdicts
  const inherited = view.factchecks;
  const badge =
    inherited.length > 0
      ? `<span class="badge verdict inherited">${escapeHtml(
          inherited[inherited.length - 1].verdict,
        )}</span>`
      : "";
  const claims = view.claims
    .map(
      (c) =>
        `<li class="claim" data-claim="${escapeHtml(c.id)}">` +
        `${escapeHtml(c.text)} ${badge}` +
        (c.factchecked ? `<span class="badge source">verdict source</span>` : "") +
        `</li>`,
    )
    .join("");
  const checks = inherited
    .map(
      (f) =>
        `<li class="factcheck">${escapeHtml(f.verdict)} — ${escapeHtml(f.note)}` +
        ` <time>${escapeHtml(f.checked_at)}</time></li>`,
    )
    .join("");
  return (
    `<section class="detail" data-cluster="${view.community_id}">` +
    `<h2>Cluster #${view.community_id}</h2>` +
    `<ul class="claims">${claims}</ul>` +
    (checks ? `<h3>Factchecks</h3><ul class="factchecks">${checks}</ul>` : "") +
    `</section>`
  );
}

export function renderSimilar(similar: SimilarClaim[]): string {
  if (similar.length === 0) return "";
  const rows = similar
    .map(
      (s) =>
        `<li class="similar">` +
        `<span class="badge verdict">${escapeHtml(s.factcheck?.verdict ?? "")}</span> ` +
        `${escapeHtml(s.text)} <span class="distance">${s.distance.toFixed(3)}</span>` +
        `</li>`,
    )
    .join("");
  return `<h3>Similar factchecked claims</h3><ul class="similar-list">${rows}</ul>`;
}

export function renderBoard(state: ClusterBoardState): string {
  return (
    renderOfflineBanner(state) +
    renderNotice(state) +
    renderClusterList(state) +
    (state.selected ? renderClusterDetail(state.selected) : "") +
    renderSimilar(state.similar)
  );
}
