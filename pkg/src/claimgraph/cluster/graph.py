"""Incremental epsilon-graph of claims with Louvain community assignment.

Insertion links the new claim to every stored claim under epsilon via a flat
vectorized scan (no ANN index), then re-runs Louvain on just the connected
subgraph containing the new claim; community ids outside that subgraph are
preserved verbatim.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Set, Tuple

import numpy as np

from ..core import Claim, Metric, distance
from ..errors import (
    DegenerateVectorError,
    DimensionError,
    DuplicateClaimError,
)
from .louvain import louvain


@dataclass
class InsertionReport:
    claim_id: str
    new_edges: int
    community_id: int
    subgraph_size: int
    elapsed_ms: float
    budget_exceeded: bool = False
    merged_communities: List[int] = field(default_factory=list)

    def to_record(self) -> dict:
        return {
            "claim_id": self.claim_id,
            "new_edges": self.new_edges,
            "community_id": self.community_id,
            "subgraph_size": self.subgraph_size,
            "elapsed_ms": self.elapsed_ms,
            "budget_exceeded": self.budget_exceeded,
            "merged_communities": self.merged_communities,
        }


class ClaimGraph:
    """Undirected graph of claims; edge (a, b) exists iff distance(a, b) < epsilon."""

    def __init__(
        self,
        epsilon: float,
        dim: int,
        metric: Metric = Metric.EUCLIDEAN,
        seed: int = 0,
        latency_budget_ms: float = 300.0,
    ):
        if epsilon <= 0:
            raise ValueError(f"epsilon must be > 0, got {epsilon}")
        if dim < 1:
            raise DimensionError(f"dim must be >= 1, got {dim}")
        self.epsilon = float(epsilon)
        self.dim = int(dim)
        self.metric = metric
        self.seed = seed
        self.latency_budget_ms = latency_budget_ms
        self.claims: Dict[str, Claim] = {}
        self.adjacency: Dict[str, Dict[str, float]] = {}
        self.communities: Dict[str, int] = {}
        self._next_community = 0
        self._ids: List[str] = []
        # float32-quantized values held as float64, so the per-insert scan is
        # a plain dgemv with no whole-matrix dtype conversion
        self._matrix = np.empty((0, self.dim), dtype=np.float64)
        self._sq_norms = np.empty(0, dtype=np.float64)
        self._count = 0

    # ------------------------------------------------------------------
    # storage helpers
    # ------------------------------------------------------------------

    def __len__(self) -> int:
        return self._count

    def _append_vector(self, vec: np.ndarray) -> None:
        if self._count == self._matrix.shape[0]:
            new_cap = max(256, self._matrix.shape[0] * 2)
            grown = np.empty((new_cap, self.dim), dtype=np.float64)
            grown[: self._count] = self._matrix[: self._count]
            self._matrix = grown
            grown_sq = np.empty(new_cap, dtype=np.float64)
            grown_sq[: self._count] = self._sq_norms[: self._count]
            self._sq_norms = grown_sq
        self._matrix[self._count] = vec
        v64 = vec.astype(np.float64)
        self._sq_norms[self._count] = float(np.dot(v64, v64))
        self._count += 1

    def _distances_to(self, vec: np.ndarray) -> np.ndarray:
        """Distances from vec to every stored claim, float64, in storage order."""
        n = self._count
        if n == 0:
            return np.empty(0, dtype=np.float64)
        M = self._matrix[:n]
        q = np.asarray(vec, dtype=np.float64)
        dots = M @ q
        if self.metric is Metric.EUCLIDEAN:
            d2 = self._sq_norms[:n] + float(np.dot(q, q)) - 2.0 * dots
            np.maximum(d2, 0.0, out=d2)
            return np.sqrt(d2)
        qn = float(np.linalg.norm(q))
        norms = np.sqrt(self._sq_norms[:n])
        if qn == 0.0 or np.any(norms == 0.0):
            raise DegenerateVectorError("cosine distance undefined for a zero vector")
        return np.clip(1.0 - dots / (norms * qn), 0.0, 2.0)

    # ------------------------------------------------------------------
    # insertion
    # ------------------------------------------------------------------

    def link_claim(self, c: Claim) -> Set[Tuple[str, str, float]]:
        """Add c as a node with an edge to every stored claim under epsilon.

        Returns the set of new (existing_id, new_id, distance) edges.
        """
        if c.id in self.claims:
            raise DuplicateClaimError(f"claim id already stored: {c.id}")
        if c.embedding.size != self.dim:
            raise DimensionError(f"claim dim {c.embedding.size} != engine dim {self.dim}")
        dists = self._distances_to(c.embedding)
        hits = np.flatnonzero(dists < self.epsilon)
        edges: Set[Tuple[str, str, float]] = set()
        nbrs: Dict[str, float] = {}
        for i in hits:
            other = self._ids[int(i)]
            d = float(dists[int(i)])
            nbrs[other] = d
            edges.add((other, c.id, d))
        self.claims[c.id] = c
        self._ids.append(c.id)
        self._append_vector(c.embedding)
        self.adjacency[c.id] = nbrs
        for other, d in nbrs.items():
            self.adjacency[other][c.id] = d
        return edges

    def _component_of(self, claim_id: str) -> Set[str]:
        comp = {claim_id}
        stack = [claim_id]
        while stack:
            u = stack.pop()
            for v in self.adjacency[u]:
                if v not in comp:
                    comp.add(v)
                    stack.append(v)
        return comp

    def insert_claim(self, c: Claim) -> InsertionReport:
        """Link c, then recompute Louvain on the connected subgraph containing c."""
        t0 = time.perf_counter()
        edges = self.link_claim(c)
        comp = self._component_of(c.id)
        merged: List[int] = []
        if len(comp) == 1:
            cid = self._fresh_community()
            self.communities[c.id] = cid
        else:
            sub = {u: [v for v in self.adjacency[u] if v in comp] for u in comp}
            # normalize gains by the whole graph's 2m, not the component's,
            # so the local recompute tracks whole-graph modularity
            total_m2 = float(sum(len(nbrs) for nbrs in self.adjacency.values()))
            local = louvain(sub, seed=self.seed, m2_override=total_m2)
            cid, merged = self._relabel_subgraph(local)
        elapsed_ms = (time.perf_counter() - t0) * 1000.0
        return InsertionReport(
            claim_id=c.id,
            new_edges=len(edges),
            community_id=cid,
            subgraph_size=len(comp),
            elapsed_ms=elapsed_ms,
            budget_exceeded=elapsed_ms > self.latency_budget_ms,
            merged_communities=merged,
        )

    def _fresh_community(self) -> int:
        cid = self._next_community
        self._next_community += 1
        return cid

    def _relabel_subgraph(self, local: Dict[str, int]) -> Tuple[int, List[int]]:
        """Map local community labels to global ids, reusing the smallest
        previous id per community; returns (id of the new claim's community,
        previous community ids that were merged together)."""
        groups: Dict[int, List[str]] = {}
        for node, lc in local.items():
            groups.setdefault(lc, []).append(node)
        merged_events: List[int] = []
        used: Set[int] = set()
        new_claim_cid = -1
        new_node = next(n for n in local if n not in self.communities)
        for lc in sorted(groups, key=lambda lc: min(groups[lc])):
            members = groups[lc]
            previous = sorted({self.communities[n] for n in members if n in self.communities})
            if len(previous) > 1:
                merged_events.extend(previous)
            cid = next((p for p in previous if p not in used), None)
            if cid is None:
                cid = self._fresh_community()
            used.add(cid)
            for n in members:
                self.communities[n] = cid
            if new_node in members:
                new_claim_cid = cid
        return new_claim_cid, merged_events

    # ------------------------------------------------------------------
    # queries
    # ------------------------------------------------------------------

    def query_similar(self, v: np.ndarray, k: int = 5) -> List[Tuple[Claim, float]]:
        """k nearest stored claims, ascending distance, ties broken on claim id."""
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        v = np.asarray(v, dtype=np.float32)
        if v.size != self.dim:
            raise DimensionError(f"query dim {v.size} != engine dim {self.dim}")
        dists = self._distances_to(v)
        ranked = sorted(zip(dists.tolist(), self._ids))
        return [(self.claims[cid], d) for d, cid in ranked[:k]]

    def community_members(self, community_id: int) -> List[str]:
        return sorted(cid for cid, com in self.communities.items() if com == community_id)

    def edge_set(self) -> Set[Tuple[str, str]]:
        return {
            (min(a, b), max(a, b))
            for a, nbrs in self.adjacency.items()
            for b in nbrs
        }

    def check_edge_invariant(self) -> bool:
        """Full rescan: every stored edge is under epsilon and no pair is missing."""
        ids = self._ids
        for i, a in enumerate(ids):
            for b in ids[i + 1 :]:
                d = distance(self.claims[a].embedding, self.claims[b].embedding, self.metric)
                has = b in self.adjacency[a]
                if (d < self.epsilon) != has:
                    return False
        return True

    # ------------------------------------------------------------------
    # snapshot persistence
    # ------------------------------------------------------------------

    def to_snapshot_obj(self) -> dict:
        edges = sorted(
            [a, b, float(np.float32(self.adjacency[a][b]))]
            for a in self.adjacency
            for b in self.adjacency[a]
            if a < b
        )
        return {
            "manifest": {
                "epsilon": self.epsilon,
                "metric": self.metric.value,
                "dim": self.dim,
                "node_count": self._count,
                "seed": self.seed,
                "next_community": self._next_community,
            },
            "claims": [self.claims[cid].to_record() for cid in sorted(self.claims)],
            "edges": edges,
            "communities": {cid: self.communities[cid] for cid in sorted(self.communities)},
        }

    def save_snapshot(self, path: str | Path) -> None:
        """Deterministic JSON snapshot; load + re-save is byte-identical."""
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_snapshot_obj(), f, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_snapshot_obj(
        cls, obj: dict, latency_budget_ms: float = 300.0
    ) -> "ClaimGraph":
        man = obj["manifest"]
        g = cls(
            epsilon=man["epsilon"],
            dim=man["dim"],
            metric=Metric(man["metric"]),
            seed=man.get("seed", 0),
            latency_budget_ms=latency_budget_ms,
        )
        for rec in obj["claims"]:
            c = Claim.from_record(rec)
            g.claims[c.id] = c
            g._ids.append(c.id)
            g._append_vector(c.embedding)
            g.adjacency[c.id] = {}
        for a, b, d in obj["edges"]:
            g.adjacency[a][b] = d
            g.adjacency[b][a] = d
        g.communities = {cid: int(com) for cid, com in obj["communities"].items()}
        g._next_community = man.get(
            "next_community", max(g.communities.values(), default=-1) + 1
        )
        return g

    @classmethod
    def load_snapshot(
        cls, path: str | Path, latency_budget_ms: float = 300.0
    ) -> "ClaimGraph":
        with open(path, "r", encoding="utf-8") as f:
            obj = json.load(f)
        return cls.from_snapshot_obj(obj, latency_budget_ms=latency_budget_ms)
