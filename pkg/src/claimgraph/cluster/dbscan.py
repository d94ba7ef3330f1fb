"""Batch DBSCAN over embedding vectors, used by the evaluation harness.

Neighborhoods use strict ``distance < epsilon`` so that min_size=1 reduces
exactly to connected components of the epsilon-graph. Border points (non-core
within epsilon of a core point) join the cluster of their nearest core
neighbor, ties broken by smallest point index; this makes the output
deterministic and independent of scan order.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np

from ..core import Metric
from ..errors import DegenerateVectorError

NOISE = -1


@dataclass
class DbscanResult:
    labels: List[int]  # per point index: cluster id or NOISE
    min_size: int

    @property
    def cluster_of(self) -> Dict[int, int]:
        return {i: c for i, c in enumerate(self.labels)}

    def clusters(self) -> List[List[int]]:
        """Non-noise clusters as lists of point indices, ordered by cluster id."""
        groups: Dict[int, List[int]] = {}
        for i, c in enumerate(self.labels):
            if c != NOISE:
                groups.setdefault(c, []).append(i)
        return [groups[c] for c in sorted(groups)]

    @property
    def cluster_count(self) -> int:
        return len({c for c in self.labels if c != NOISE})


def pairwise_distances(points: Sequence[np.ndarray], metric: Metric) -> np.ndarray:
    """Full float64 distance matrix."""
    X = np.asarray([np.asarray(p, dtype=np.float64) for p in points])
    if metric is Metric.EUCLIDEAN:
        sq = np.sum(X * X, axis=1)
        d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
        np.maximum(d2, 0.0, out=d2)
        return np.sqrt(d2)
    norms = np.linalg.norm(X, axis=1)
    if np.any(norms == 0):
        raise DegenerateVectorError("cosine distance undefined for a zero vector")
    cos = (X @ X.T) / np.outer(norms, norms)
    return np.clip(1.0 - cos, 0.0, 2.0)


def dbscan(
    points: Sequence[np.ndarray],
    epsilon: float,
    min_size: int = 1,
    metric: Metric = Metric.EUCLIDEAN,
) -> DbscanResult:
    if epsilon <= 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    if min_size < 1:
        raise ValueError(f"min_size must be >= 1, got {min_size}")
    n = len(points)
    if n == 0:
        return DbscanResult(labels=[], min_size=min_size)
    dist = pairwise_distances(points, metric)
    within = dist < epsilon
    np.fill_diagonal(within, False)
    # core iff the epsilon-neighborhood (including the point itself) has
    # at least min_size members
    neighbor_counts = within.sum(axis=1)
    core = neighbor_counts + 1 >= min_size

    labels = [NOISE] * n
    cluster_id = 0
    # BFS over core-core links
    for s in range(n):
        if not core[s] or labels[s] != NOISE:
            continue
        labels[s] = cluster_id
        queue = [s]
        while queue:
            u = queue.pop()
            for v in np.flatnonzero(within[u]):
                v = int(v)
                if core[v] and labels[v] == NOISE:
                    labels[v] = cluster_id
                    queue.append(v)
        cluster_id += 1
    # border points attach to the nearest core neighbor
    for i in range(n):
        if labels[i] != NOISE:
            continue
        core_nbrs = [int(v) for v in np.flatnonzero(within[i]) if core[v]]
        if core_nbrs:
            best = min(core_nbrs, key=lambda v: (dist[i, v], v))
            labels[i] = labels[best]
    return DbscanResult(labels=labels, min_size=min_size)
