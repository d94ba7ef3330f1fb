"""Measurement harness: duplicate-pair distance analysis, threshold sweep,
the cluster-quality score, and epsilon grid search with Table-style reports.
"""
from __future__ import annotations

import csv
import json
import time
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Hashable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .core import Metric, distance
from .embeddings import EmbeddingProvider
from .errors import (
    CorpusFormatError,
    DegenerateLabelsError,
    EmptyDatasetError,
    MissingLabelError,
)
from .cluster import dbscan
from .detection import evaluate_prf


@dataclass(frozen=True)
class LabeledPair:
    text_a: str
    text_b: str
    is_duplicate: bool

    def __post_init__(self):
        if not self.text_a or not self.text_b:
            raise CorpusFormatError("pair texts must be non-empty")


@dataclass(frozen=True)
class QualityParams:
    A: float = 1.0
    B: float = 1.0
    C: float = 1.0

    def __post_init__(self):
        if self.A <= 0 or self.B <= 0 or self.C <= 0:
            raise ValueError("quality parameters must be strictly positive")


@dataclass
class ClusterQualityScore:
    score: float
    p_os: float
    p_cc: float
    n_c: int


@dataclass
class ClusteringReportRow:
    embedding_name: str
    time_taken_s: float
    embedding_time_s: float
    clustering_time_s: float
    claims_clustered: int
    cluster_count: int
    pct_majority: float
    pct_one_story: float

    CSV_COLUMNS = (
        "embedding_name",
        "time_taken_s",
        "embedding_time_s",
        "clustering_time_s",
        "claims_clustered",
        "cluster_count",
        "pct_majority",
        "pct_one_story",
    )

    def as_csv_row(self) -> List[str]:
        return [
            self.embedding_name,
            f"{self.time_taken_s:.2f}",
            f"{self.embedding_time_s:.2f}",
            f"{self.clustering_time_s:.2f}",
            str(self.claims_clustered),
            str(self.cluster_count),
            f"{self.pct_majority:.2f}",
            f"{self.pct_one_story:.2f}",
        ]


@dataclass(frozen=True)
class StoryClaim:
    text: str
    story_id: str


# ---------------------------------------------------------------------------
# pair distances, histogram, threshold sweep
# ---------------------------------------------------------------------------

def pair_distances(
    pairs: Sequence[LabeledPair],
    provider: EmbeddingProvider,
    metric: Optional[Metric] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Distance per pair plus a boolean duplicate-label array."""
    if not pairs:
        raise EmptyDatasetError("no labeled pairs")
    metric = metric or provider.metric
    va = provider.embed([p.text_a for p in pairs])
    vb = provider.embed([p.text_b for p in pairs])
    dists = np.asarray([distance(a, b, metric) for a, b in zip(va, vb)])
    labels = np.asarray([p.is_duplicate for p in pairs], dtype=bool)
    return dists, labels


@dataclass
class HistogramResult:
    bin_edges: List[float]
    duplicate_counts: List[int]
    non_duplicate_counts: List[int]

    def to_json_obj(self) -> dict:
        return {
            "bin_edges": self.bin_edges,
            "duplicate_counts": self.duplicate_counts,
            "non_duplicate_counts": self.non_duplicate_counts,
        }


def distance_histogram(
    pairs: Sequence[LabeledPair],
    provider: EmbeddingProvider,
    metric: Optional[Metric] = None,
    bins: int = 50,
) -> HistogramResult:
    """Per-class counts over equal-width bins spanning the observed range."""
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    dists, labels = pair_distances(pairs, provider, metric)
    lo, hi = float(dists.min()), float(dists.max())
    if hi == lo:
        hi = lo + 1e-9
    dup, edges = np.histogram(dists[labels], bins=bins, range=(lo, hi))
    non, _ = np.histogram(dists[~labels], bins=bins, range=(lo, hi))
    return HistogramResult(
        bin_edges=[float(e) for e in edges],
        duplicate_counts=[int(c) for c in dup],
        non_duplicate_counts=[int(c) for c in non],
    )


@dataclass
class SweepResult:
    best_threshold: float
    best_f1: float
    curve: List[Tuple[float, float]]  # (threshold, f1)


def sweep_thresholds(distances: Sequence[float], labels: Sequence[bool]) -> SweepResult:
    """F1 over candidate thresholds: midpoints between consecutive distinct
    distances plus both extremes. Duplicate predicted iff distance < threshold.
    Returns the F1-maximizing threshold, smallest on ties."""
    d = np.asarray(distances, dtype=np.float64)
    y = np.asarray(labels, dtype=bool)
    if d.size == 0:
        raise EmptyDatasetError("no distances to sweep")
    if y.all() or not y.any():
        raise DegenerateLabelsError("threshold sweep needs both classes")
    distinct = np.unique(d)
    candidates = [float(distinct[0])]
    candidates += [float((a + b) / 2.0) for a, b in zip(distinct[:-1], distinct[1:])]
    candidates.append(float(distinct[-1]) + 1.0)
    curve = []
    best_t, best_f1 = candidates[0], -1.0
    for t in candidates:
        predicted = d < t
        _, _, f1 = evaluate_prf(predicted.tolist(), y.tolist())
        curve.append((t, f1))
        if f1 > best_f1:
            best_t, best_f1 = t, f1
    return SweepResult(best_threshold=best_t, best_f1=best_f1, curve=curve)


def threshold_sweep(
    pairs: Sequence[LabeledPair],
    provider: EmbeddingProvider,
    metric: Optional[Metric] = None,
) -> SweepResult:
    dists, labels = pair_distances(pairs, provider, metric)
    return sweep_thresholds(dists, labels)


# ---------------------------------------------------------------------------
# cluster quality and grid search
# ---------------------------------------------------------------------------

def cluster_quality(
    clusters: Sequence[Sequence[Hashable]],
    story_of: Mapping[Hashable, str],
    params: QualityParams = QualityParams(),
) -> ClusterQualityScore:
    """Score = (A*P_os + B*P_cc) * (C*N_c).

    N_c counts claims placed in clusters; P_os is the fraction of those in
    single-story clusters; P_cc the fraction matching their cluster's modal
    story (a tie counts when the claim's story is among the modes).
    """
    n_c = sum(len(c) for c in clusters)
    if n_c == 0:
        return ClusterQualityScore(score=0.0, p_os=0.0, p_cc=0.0, n_c=0)
    one_story = 0
    majority = 0
    for cluster in clusters:
        stories = []
        for claim in cluster:
            if claim not in story_of:
                raise MissingLabelError(f"clustered claim has no story label: {claim!r}")
            stories.append(story_of[claim])
        counts = Counter(stories)
        if len(counts) == 1:
            one_story += len(cluster)
        top = max(counts.values())
        modes = {s for s, c in counts.items() if c == top}
        majority += sum(1 for s in stories if s in modes)
    p_os = one_story / n_c
    p_cc = majority / n_c
    score = (params.A * p_os + params.B * p_cc) * (params.C * n_c)
    return ClusterQualityScore(score=score, p_os=p_os, p_cc=p_cc, n_c=n_c)


@dataclass
class GridSearchResult:
    best_epsilon: float
    best_score: ClusterQualityScore
    curve: List[Tuple[float, ClusterQualityScore]]  # per epsilon
    report_row: ClusteringReportRow
    best_clusters: List[List[int]] = field(default_factory=list)

    def curve_json_obj(self) -> list:
        return [
            {
                "epsilon": eps,
                "score": s.score,
                "p_os": s.p_os,
                "p_cc": s.p_cc,
                "n_c": s.n_c,
            }
            for eps, s in self.curve
        ]


def grid_search_epsilon(
    claims: Sequence[StoryClaim],
    provider: EmbeddingProvider,
    grid: Sequence[float],
    min_size: int = 2,
    params: Optional[QualityParams] = None,
    metric: Optional[Metric] = None,
) -> GridSearchResult:
    """Run dbscan at every epsilon in the grid, score each clustering, and
    return the argmax (smallest epsilon on ties) with a report row."""
    if not grid:
        raise ValueError("epsilon grid must be non-empty")
    if not claims:
        raise EmptyDatasetError("no claims to cluster")
    metric = metric or provider.metric
    if params is None:
        # default C keeps the second factor as the clustered fraction
        params = QualityParams(A=1.0, B=1.0, C=1.0 / len(claims))
    t0 = time.perf_counter()
    vectors = provider.embed([c.text for c in claims])
    embedding_time = time.perf_counter() - t0
    story_of = {i: c.story_id for i, c in enumerate(claims)}
    t1 = time.perf_counter()
    curve: List[Tuple[float, ClusterQualityScore]] = []
    best_eps, best, best_clusters = None, None, []
    for eps in grid:
        result = dbscan(vectors, epsilon=eps, min_size=min_size, metric=metric)
        clusters = result.clusters()
        score = cluster_quality(clusters, story_of, params)
        curve.append((float(eps), score))
        if best is None or score.score > best.score:
            best_eps, best, best_clusters = float(eps), score, clusters
    clustering_time = time.perf_counter() - t1
    row = ClusteringReportRow(
        embedding_name=provider.name,
        time_taken_s=embedding_time + clustering_time,
        embedding_time_s=embedding_time,
        clustering_time_s=clustering_time,
        claims_clustered=best.n_c,
        cluster_count=len(best_clusters),
        pct_majority=100.0 * best.p_cc,
        pct_one_story=100.0 * best.p_os,
    )
    return GridSearchResult(
        best_epsilon=best_eps,
        best_score=best,
        curve=curve,
        report_row=row,
        best_clusters=best_clusters,
    )


# ---------------------------------------------------------------------------
# corpus loaders and report writers
# ---------------------------------------------------------------------------

def load_pairs_csv(
    path: str | Path,
    column_map: Optional[Mapping[str, str]] = None,
) -> List[LabeledPair]:
    """CSV with header text_a,text_b,is_duplicate (0/1). ``column_map`` maps
    those names onto the file's own columns, e.g. for the public Quora export
    {"text_a": "question1", "text_b": "question2", "is_duplicate": "is_duplicate"}.
    """
    cm = {"text_a": "text_a", "text_b": "text_b", "is_duplicate": "is_duplicate"}
    if column_map:
        cm.update(column_map)
    pairs: List[LabeledPair] = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise CorpusFormatError(f"{path}: missing header")
        for col in cm.values():
            if col not in reader.fieldnames:
                raise CorpusFormatError(f"{path}: missing column {col!r}")
        for lineno, row in enumerate(reader, start=2):
            flag = row[cm["is_duplicate"]].strip()
            if flag not in ("0", "1"):
                raise CorpusFormatError(f"{path}:{lineno}: is_duplicate must be 0 or 1, got {flag!r}")
            a, b = row[cm["text_a"]], row[cm["text_b"]]
            if not a or not b:
                raise CorpusFormatError(f"{path}:{lineno}: empty pair text")
            pairs.append(LabeledPair(text_a=a, text_b=b, is_duplicate=flag == "1"))
    return pairs


def load_story_claims_jsonl(path: str | Path) -> List[StoryClaim]:
    claims: List[StoryClaim] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                claims.append(StoryClaim(text=rec["text"], story_id=str(rec["story_id"])))
            except (json.JSONDecodeError, KeyError, TypeError) as e:
                raise CorpusFormatError(f"{path}:{lineno}: {e}") from e
    return claims


def write_report_csv(rows: Sequence[ClusteringReportRow], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(ClusteringReportRow.CSV_COLUMNS)
        for row in rows:
            writer.writerow(row.as_csv_row())
