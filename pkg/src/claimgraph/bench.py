"""Insertion-latency benchmark: per-claim insert time versus graph size.

Synthetic claims are drawn from well-separated blobs so that insertions
exercise both the flat distance scan and the connected-subgraph Louvain
recompute on realistically sized communities.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np

from .cluster import ClaimGraph
from .core import Claim, Metric, Sentence


@dataclass
class CheckpointStats:
    size: int
    median_ms: float
    p95_ms: float
    mean_ms: float


@dataclass
class BenchResult:
    dim: int
    epsilon: float
    checkpoints: List[CheckpointStats]
    latencies_ms: List[float] = field(default_factory=list)

    def to_json_obj(self) -> dict:
        return {
            "dim": self.dim,
            "epsilon": self.epsilon,
            "checkpoints": [
                {
                    "size": c.size,
                    "median_ms": c.median_ms,
                    "p95_ms": c.p95_ms,
                    "mean_ms": c.mean_ms,
                }
                for c in self.checkpoints
            ],
        }


def blob_vectors(
    n: int, dim: int, blob_size: int = 50, blob_std: float = 0.1, seed: int = 0
) -> np.ndarray:
    rng = np.random.default_rng(seed)
    num_centers = max(1, (n + blob_size - 1) // blob_size)
    centers = rng.normal(0.0, 10.0, size=(num_centers, dim))
    assignment = rng.integers(0, num_centers, size=n)
    return (centers[assignment] + rng.normal(0.0, blob_std, size=(n, dim))).astype(np.float32)


def run_bench(
    n: int,
    dim: int = 512,
    epsilon: float = 4.0,
    blob_size: int = 50,
    blob_std: float = 0.1,
    seed: int = 0,
    checkpoints: Sequence[int] = (1000, 5000, 10000),
    window: int = 500,
) -> BenchResult:
    """Insert n synthetic claims one at a time; report latency stats over the
    last ``window`` insertions before each checkpoint size."""
    vectors = blob_vectors(n, dim, blob_size=blob_size, blob_std=blob_std, seed=seed)
    engine = ClaimGraph(epsilon=epsilon, dim=dim, metric=Metric.EUCLIDEAN, seed=seed)
    latencies: List[float] = []
    stats: Dict[int, CheckpointStats] = {}
    marks = sorted(c for c in checkpoints if c <= n)
    for i in range(n):
        claim = Claim(
            id=f"bench#{i:07d}",
            sentence=Sentence(text=f"bench {i}", article_id="bench", char_start=0, char_end=7),
            embedding=vectors[i],
            detection_score=1.0,
        )
        report = engine.insert_claim(claim)
        latencies.append(report.elapsed_ms)
        size = i + 1
        if size in marks:
            recent = np.asarray(latencies[-window:])
            stats[size] = CheckpointStats(
                size=size,
                median_ms=float(np.median(recent)),
                p95_ms=float(np.percentile(recent, 95)),
                mean_ms=float(np.mean(recent)),
            )
    return BenchResult(
        dim=dim,
        epsilon=epsilon,
        checkpoints=[stats[s] for s in marks],
        latencies_ms=latencies,
    )
