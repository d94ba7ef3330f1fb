"""HTTP service wrapping the cluster engine: article ingestion, claim
submission, cluster browsing, similarity queries, and factcheck propagation.

All engine mutations go through one writer lock; durability comes from the
write-ahead event log plus periodic snapshots (see persistence module).
Inherited factchecks are resolved at read time from community membership, so
community merges propagate automatically.
"""
from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from fastapi import FastAPI, HTTPException, Query

from .cluster import ClaimGraph, InsertionReport
from .core import Category, Claim, Factcheck, Metric, Sentence, Verdict, distance
from .detection import ClaimClassifier, filter_categories, predict, split_sentences, FilterRules
from .embeddings import (
    EmbeddingProvider,
    RemoteEmbedderConfig,
    RemoteProvider,
    StoreProvider,
    TfidfProvider,
    VectorStore,
    fit_tfidf,
    load_tfidf_model,
)
from .errors import (
    ClaimgraphError,
    DegenerateVectorError,
    DimensionError,
    DuplicateArticleError,
    DuplicateClaimError,
    MissingVectorError,
    RemoteProtocolError,
    RemoteTimeoutError,
)
from .persistence import PersistenceDir

PROVIDER_ERRORS = (
    MissingVectorError,
    RemoteProtocolError,
    RemoteTimeoutError,
    DegenerateVectorError,
    DimensionError,
)


@dataclass
class Article:
    id: str
    title: str
    body: str
    source_url: str = ""
    published_at: str = ""

    def __post_init__(self):
        if not self.body:
            raise ValueError("article body must be non-empty")

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "body": self.body,
            "source_url": self.source_url,
            "published_at": self.published_at,
        }


@dataclass
class ServiceConfig:
    epsilon: float
    dim: int
    metric: Metric = Metric.EUCLIDEAN
    provider: dict = field(default_factory=dict)
    classifier_path: Optional[str] = None
    detection_threshold: float = 0.5
    persistence_dir: str = "claimgraph-state"
    listen_address: str = "127.0.0.1:8080"
    latency_budget_ms: float = 300.0
    snapshot_every: int = 100
    similar_k: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.latency_budget_ms <= 0:
            raise ValueError("latency_budget_ms must be > 0")

    @classmethod
    def load(cls, path: str | Path) -> "ServiceConfig":
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
        raw["metric"] = Metric(raw.get("metric", "euclidean"))
        return cls(**raw)


def build_provider(cfg: ServiceConfig) -> EmbeddingProvider:
    spec = dict(cfg.provider)
    kind = spec.pop("type", "tfidf")
    normalize = bool(spec.pop("normalize", False))
    if kind == "tfidf":
        if "model_path" in spec:
            model = load_tfidf_model(spec["model_path"])
        else:
            with open(spec["fit_corpus"], "r", encoding="utf-8") as f:
                corpus = [ln.strip() for ln in f if ln.strip()]
            model = fit_tfidf(corpus, hash_dim=cfg.dim)
        return TfidfProvider(model=model, metric=cfg.metric)
    if kind == "store":
        return StoreProvider(
            store=VectorStore.load(spec["path"]), metric=cfg.metric, normalize=normalize
        )
    if kind == "remote":
        return RemoteProvider(
            config=RemoteEmbedderConfig(
                endpoint_url=spec["endpoint_url"],
                expected_dim=cfg.dim,
                timeout_ms=spec.get("timeout_ms", 10_000),
                batch_size=spec.get("batch_size", 32),
            ),
            metric=cfg.metric,
            normalize=normalize,
        )
    raise ValueError(f"unknown provider type: {kind}")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class ServiceState:
    """Engine + articles + durability. Single writer, many readers."""

    def __init__(self, cfg: ServiceConfig, provider: Optional[EmbeddingProvider] = None):
        self.cfg = cfg
        self.provider = provider or build_provider(cfg)
        if self.provider.dim != cfg.dim:
            raise DimensionError(
                f"provider dim {self.provider.dim} != configured dim {cfg.dim}"
            )
        self.classifier: Optional[ClaimClassifier] = (
            ClaimClassifier.load(cfg.classifier_path) if cfg.classifier_path else None
        )
        if self.classifier is not None:
            self.classifier.threshold = cfg.detection_threshold
        self.rules = FilterRules()
        self.engine = ClaimGraph(
            epsilon=cfg.epsilon,
            dim=cfg.dim,
            metric=cfg.metric,
            seed=cfg.seed,
            latency_budget_ms=cfg.latency_budget_ms,
        )
        self.articles: Dict[str, Article] = {}
        self.community_updated: Dict[int, str] = {}
        self._submit_seq = 0
        self._lock = threading.Lock()
        self._pdir = PersistenceDir(Path(cfg.persistence_dir))
        self._recover()
        self._log = self._pdir.open_log()

    # ------------------------------------------------------------------
    # recovery and snapshots
    # ------------------------------------------------------------------

    def _recover(self) -> None:
        snap = self._pdir.snapshot_store().load()
        start = 0
        if snap is not None:
            self.engine = ClaimGraph.from_snapshot_obj(
                snap["engine"], latency_budget_ms=self.cfg.latency_budget_ms
            )
            self.articles = {
                rec["id"]: Article(**rec) for rec in snap.get("articles", [])
            }
            self._submit_seq = snap.get("submit_seq", 0)
            start = snap.get("event_count", 0)
        replay_log = PersistenceDir(self._pdir.root).open_log()
        try:
            for event in replay_log.iter_events(start=start):
                self._apply(event)
        finally:
            replay_log.close()
        for cid in set(self.engine.communities.values()):
            self.community_updated.setdefault(cid, _now())

    def _apply(self, event: dict) -> List[InsertionReport]:
        """Apply one durable event to in-memory state (also used on replay)."""
        etype = event["type"]
        reports: List[InsertionReport] = []
        if etype == "article":
            art = Article(**event["article"])
            self.articles[art.id] = art
            for rec in event["claims"]:
                reports.append(self._insert(Claim.from_record(rec)))
        elif etype == "claim":
            self._submit_seq += 1
            reports.append(self._insert(Claim.from_record(event["claim"])))
        elif etype == "factcheck":
            claim = self.engine.claims[event["claim_id"]]
            claim.factcheck = Factcheck(
                verdict=Verdict(event["verdict"]),
                note=event["note"],
                checked_at=event["checked_at"],
                source_claim_id=event["claim_id"],
            )
            self.community_updated[self.engine.communities[claim.id]] = event["checked_at"]
        else:
            raise ClaimgraphError(f"unknown event type: {etype}")
        return reports

    def _insert(self, claim: Claim) -> InsertionReport:
        report = self.engine.insert_claim(claim)
        stamp = _now()
        self.community_updated[report.community_id] = stamp
        for cid in report.merged_communities:
            self.community_updated.pop(cid, None)
            self.community_updated[report.community_id] = stamp
        return report

    def _maybe_snapshot(self) -> None:
        if self.cfg.snapshot_every > 0 and self._log.count % self.cfg.snapshot_every == 0:
            self.snapshot()

    def snapshot(self) -> None:
        self._pdir.snapshot_store().save(
            {
                "engine": self.engine.to_snapshot_obj(),
                "articles": [self.articles[a].to_record() for a in sorted(self.articles)],
                "submit_seq": self._submit_seq,
                "event_count": self._log.count,
            }
        )

    def close(self) -> None:
        self._log.close()

    # ------------------------------------------------------------------
    # write operations
    # ------------------------------------------------------------------

    def _detect_claims(self, article: Article) -> List[Claim]:
        sentences = split_sentences(article.body, article_id=article.id)
        if not sentences:
            return []
        vectors = self.provider.embed([s.text for s in sentences])
        claims: List[Claim] = []
        for idx, (sent, vec) in enumerate(zip(sentences, vectors)):
            if self.classifier is not None:
                score, is_claim = predict(self.classifier, vec)
                if not is_claim:
                    continue
            else:
                score = 1.0
            claims.append(
                Claim(
                    id=f"{article.id}:s{idx}",
                    sentence=sent,
                    embedding=vec,
                    detection_score=score,
                )
            )
        return filter_categories(claims, self.rules)

    def ingest_article(self, article: Article) -> List[InsertionReport]:
        with self._lock:
            if article.id in self.articles:
                raise DuplicateArticleError(f"article already ingested: {article.id}")
            claims = self._detect_claims(article)  # provider errors propagate, nothing persisted
            event = {
                "type": "article",
                "article": article.to_record(),
                "claims": [c.to_record() for c in claims],
            }
            self._log.append(event)
            reports = self._apply(event)
            self._maybe_snapshot()
            return reports

    def submit_claim(self, text: str) -> Tuple[InsertionReport, List[dict]]:
        if not text or not text.strip():
            raise ValueError("claim text must be non-empty")
        with self._lock:
            vec = self.provider.embed([text])[0]
            claim_id = f"submitted:{self._submit_seq}"
            claim = Claim(
                id=claim_id,
                sentence=Sentence(text=text, article_id="", char_start=0, char_end=len(text)),
                embedding=vec,
                detection_score=1.0,
            )
            event = {"type": "claim", "claim": claim.to_record()}
            self._log.append(event)
            report = self._apply(event)[0]
            similar = self._similar_factchecked(vec, exclude=claim_id, k=self.cfg.similar_k)
            self._maybe_snapshot()
            return report, similar

    def attach_factcheck(self, claim_id: str, verdict: str, note: str) -> int:
        with self._lock:
            if claim_id not in self.engine.claims:
                raise KeyError(claim_id)
            event = {
                "type": "factcheck",
                "claim_id": claim_id,
                "verdict": Verdict(verdict).value,
                "note": note,
                "checked_at": _now(),
            }
            self._log.append(event)
            self._apply(event)
            self._maybe_snapshot()
            return len(self.engine.community_members(self.engine.communities[claim_id]))

    # ------------------------------------------------------------------
    # read operations
    # ------------------------------------------------------------------

    def _similar_factchecked(self, vec: np.ndarray, exclude: str, k: int) -> List[dict]:
        scored = []
        for cid, claim in self.engine.claims.items():
            if cid == exclude or claim.factcheck is None:
                continue
            scored.append((distance(vec, claim.embedding, self.engine.metric), cid))
        scored.sort()
        return [
            {
                "claim_id": cid,
                "text": self.engine.claims[cid].sentence.text,
                "distance": d,
                "factcheck": self.engine.claims[cid].factcheck.to_record(),
            }
            for d, cid in scored[:k]
        ]

    def _inherited_factchecks(self, community_id: int) -> List[dict]:
        out = []
        for member in self.engine.community_members(community_id):
            fc = self.engine.claims[member].factcheck
            if fc is not None:
                out.append(fc.to_record())
        return out

    def cluster_view(self, community_id: int) -> dict:
        members = self.engine.community_members(community_id)
        if not members:
            raise KeyError(community_id)
        return {
            "community_id": community_id,
            "claims": [
                {
                    "id": cid,
                    "text": self.engine.claims[cid].sentence.text,
                    "article_id": self.engine.claims[cid].sentence.article_id,
                    "detection_score": self.engine.claims[cid].detection_score,
                    "factchecked": self.engine.claims[cid].factcheck is not None,
                }
                for cid in members
            ],
            "factchecks": self._inherited_factchecks(community_id),
            "last_updated": self.community_updated.get(community_id, ""),
        }

    def list_clusters(self, offset: int = 0, limit: int = 50) -> Tuple[List[dict], int]:
        ids = sorted(set(self.engine.communities.values()))
        return [self.cluster_view(cid) for cid in ids[offset : offset + limit]], len(ids)


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="claimgraph", version="0.1.0")
    app.state.service = state
    # the review UI is served as static assets from elsewhere
    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.post("/articles", status_code=201)
    def post_article(body: dict):
        try:
            article = Article(**body)
        except (TypeError, ValueError) as e:
            raise HTTPException(status_code=400, detail=str(e))
        try:
            reports = state.ingest_article(article)
        except DuplicateArticleError as e:
            raise HTTPException(status_code=409, detail=str(e))
        except PROVIDER_ERRORS as e:
            raise HTTPException(status_code=502, detail=f"embedding provider failure: {e}")
        return {"article_id": article.id, "reports": [r.to_record() for r in reports]}

    @app.post("/claims", status_code=201)
    def post_claim(body: dict):
        text = body.get("text", "")
        if not isinstance(text, str) or not text.strip():
            raise HTTPException(status_code=400, detail="text must be a non-empty string")
        try:
            report, similar = state.submit_claim(text)
        except PROVIDER_ERRORS as e:
            raise HTTPException(status_code=502, detail=f"embedding provider failure: {e}")
        return {
            "report": report.to_record(),
            "community": state.cluster_view(report.community_id),
            "similar_factchecked": similar,
        }

    @app.get("/claims/{claim_id}/similar")
    def get_similar(claim_id: str, k: int = Query(default=5, ge=1)):
        claim = state.engine.claims.get(claim_id)
        if claim is None:
            raise HTTPException(status_code=404, detail=f"unknown claim: {claim_id}")
        results = [
            {
                "claim_id": c.id,
                "text": c.sentence.text,
                "distance": d,
                "factcheck": c.factcheck.to_record() if c.factcheck else None,
            }
            for c, d in state.engine.query_similar(claim.embedding, k=k + 1)
            if c.id != claim_id
        ][:k]
        return {"claim_id": claim_id, "results": results}

    @app.get("/clusters")
    def get_clusters(offset: int = Query(default=0, ge=0), limit: int = Query(default=50, ge=1)):
        clusters, total = state.list_clusters(offset=offset, limit=limit)
        return {"clusters": clusters, "total": total, "offset": offset, "limit": limit}

    @app.get("/clusters/{community_id}")
    def get_cluster(community_id: int):
        try:
            return state.cluster_view(community_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown cluster: {community_id}")

    @app.post("/claims/{claim_id}/factcheck")
    def post_factcheck(claim_id: str, body: dict):
        verdict = body.get("verdict", "")
        try:
            Verdict(verdict)
        except ValueError:
            raise HTTPException(status_code=400, detail=f"unknown verdict: {verdict!r}")
        try:
            covered = state.attach_factcheck(claim_id, verdict, body.get("note", ""))
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown claim: {claim_id}")
        return {"claim_id": claim_id, "covered": covered}

    @app.get("/healthz")
    def healthz():
        return {
            "status": "ok",
            "claims": len(state.engine),
            "clusters": len(set(state.engine.communities.values())),
        }

    return app
