import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from claimgraph.core import Metric
from claimgraph.detection import split_sentences
from claimgraph.embeddings import StoreProvider, VectorStore
from claimgraph.errors import DuplicateArticleError
from claimgraph.service import (
    Article,
    ServiceConfig,
    ServiceState,
    build_provider,
    create_app,
)

# Sentence -> vector table used across tests. Two tight groups far apart, so
# the resulting communities are unambiguous at epsilon=1.0.
SENTENCES = {
    "Unemployment rose to seven percent.": [0.0, 0.0],
    "The jobless rate climbed to seven percent.": [0.1, 0.0],
    "Unemployment reached a seven percent rate.": [0.0, 0.1],
    "The reservoir fell below half capacity.": [10.0, 10.0],
    "Water storage dropped under fifty percent.": [10.1, 10.0],
}


def store_provider(extra=None):
    table = dict(SENTENCES)
    if extra:
        table.update(extra)
    store = VectorStore(dim=2)
    for text, vec in table.items():
        store.put(text, vec)
    return StoreProvider(store=store, metric=Metric.EUCLIDEAN)


def make_state(tmp_path, provider=None, **overrides):
    cfg = ServiceConfig(
        epsilon=overrides.pop("epsilon", 1.0),
        dim=2,
        persistence_dir=str(tmp_path / "state"),
        snapshot_every=overrides.pop("snapshot_every", 0),
        **overrides,
    )
    return ServiceState(cfg, provider=provider or store_provider())


def article(article_id, *texts, title="t"):
    return {"id": article_id, "title": title, "body": " ".join(texts)}


@pytest.fixture
def client(tmp_path):
    state = make_state(tmp_path)
    with TestClient(create_app(state)) as c:
        yield c
    state.close()


# ---------------------------------------------------------------------------
# article ingestion
# ---------------------------------------------------------------------------

def test_ingest_article_creates_claims(client):
    resp = client.post(
        "/articles",
        json=article(
            "a1",
            "Unemployment rose to seven percent.",
            "The reservoir fell below half capacity.",
        ),
    )
    assert resp.status_code == 201
    body = resp.json()
    assert body["article_id"] == "a1"
    assert [r["claim_id"] for r in body["reports"]] == ["a1:s0", "a1:s1"]
    health = client.get("/healthz").json()
    assert health["claims"] == 2
    assert health["clusters"] == 2  # far apart, so two singleton communities


def test_nearby_claims_share_a_community(client):
    client.post(
        "/articles",
        json=article(
            "a1",
            "Unemployment rose to seven percent.",
            "The jobless rate climbed to seven percent.",
        ),
    )
    assert client.get("/healthz").json() == {"status": "ok", "claims": 2, "clusters": 1}


def test_duplicate_article_rejected(client):
    payload = article("a1", "Unemployment rose to seven percent.")
    assert client.post("/articles", json=payload).status_code == 201
    resp = client.post("/articles", json=payload)
    assert resp.status_code == 409


def test_empty_article_body_rejected(client):
    resp = client.post("/articles", json={"id": "a1", "title": "t", "body": ""})
    assert resp.status_code == 400
    resp = client.post("/articles", json={"id": "a1", "bogus_field": 1, "body": "x."})
    assert resp.status_code == 400


def test_missing_vector_is_bad_gateway_and_persists_nothing(client):
    resp = client.post("/articles", json=article("a1", "A sentence the store never saw."))
    assert resp.status_code == 502
    assert client.get("/healthz").json()["claims"] == 0
    # the failed ingest left no article record, so a retry is not a duplicate
    ok = client.post("/articles", json=article("a1", "Unemployment rose to seven percent."))
    assert ok.status_code == 201


# ---------------------------------------------------------------------------
# claim submission and similarity
# ---------------------------------------------------------------------------

def test_submit_claim_returns_community_view(client):
    client.post("/articles", json=article("a1", "Unemployment rose to seven percent."))
    resp = client.post("/claims", json={"text": "The jobless rate climbed to seven percent."})
    assert resp.status_code == 201
    body = resp.json()
    assert body["report"]["claim_id"] == "submitted:0"
    member_ids = {c["id"] for c in body["community"]["claims"]}
    assert member_ids == {"a1:s0", "submitted:0"}


def test_submit_empty_text_rejected(client):
    assert client.post("/claims", json={"text": "   "}).status_code == 400
    assert client.post("/claims", json={}).status_code == 400


def test_submit_unembeddable_text_is_bad_gateway(client):
    assert client.post("/claims", json={"text": "nope"}).status_code == 502


def test_similar_endpoint_excludes_self_and_sorts(client):
    client.post(
        "/articles",
        json=article(
            "a1",
            "Unemployment rose to seven percent.",
            "Unemployment reached a seven percent rate.",
            "The reservoir fell below half capacity.",
        ),
    )
    resp = client.get("/claims/a1:s0/similar", params={"k": 2})
    assert resp.status_code == 200
    results = resp.json()["results"]
    assert [r["claim_id"] for r in results] == ["a1:s1", "a1:s2"]
    assert results[0]["distance"] <= results[1]["distance"]
    assert "a1:s0" not in {r["claim_id"] for r in results}


def test_similar_unknown_claim_404(client):
    assert client.get("/claims/ghost/similar").status_code == 404


# ---------------------------------------------------------------------------
# factcheck propagation
# ---------------------------------------------------------------------------

def test_factcheck_covers_whole_community(client):
    client.post(
        "/articles",
        json=article(
            "a1",
            "Unemployment rose to seven percent.",
            "The jobless rate climbed to seven percent.",
            "Unemployment reached a seven percent rate.",
        ),
    )
    resp = client.post(
        "/claims/a1:s0/factcheck", json={"verdict": "false", "note": "it was six"}
    )
    assert resp.status_code == 200
    assert resp.json()["covered"] == 3
    # every member of the community inherits the verdict at read time
    cid = client.get("/healthz").json()
    clusters = client.get("/clusters").json()["clusters"]
    (cluster,) = clusters
    assert [fc["verdict"] for fc in cluster["factchecks"]] == ["false"]
    flags = {c["id"]: c["factchecked"] for c in cluster["claims"]}
    assert flags == {"a1:s0": True, "a1:s1": False, "a1:s2": False}


def test_factcheck_surfaces_in_submission_response(client):
    client.post("/articles", json=article("a1", "Unemployment rose to seven percent."))
    client.post("/claims/a1:s0/factcheck", json={"verdict": "misleading", "note": "n"})
    resp = client.post(
        "/claims", json={"text": "The jobless rate climbed to seven percent."}
    )
    similar = resp.json()["similar_factchecked"]
    assert similar[0]["claim_id"] == "a1:s0"
    assert similar[0]["factcheck"]["verdict"] == "misleading"


def test_factcheck_validation(client):
    client.post("/articles", json=article("a1", "Unemployment rose to seven percent."))
    assert (
        client.post("/claims/a1:s0/factcheck", json={"verdict": "sorta"}).status_code == 400
    )
    assert (
        client.post("/claims/ghost/factcheck", json={"verdict": "true"}).status_code == 404
    )


# ---------------------------------------------------------------------------
# cluster listing
# ---------------------------------------------------------------------------

def test_cluster_listing_and_pagination(client):
    client.post(
        "/articles",
        json=article(
            "a1",
            "Unemployment rose to seven percent.",
            "The reservoir fell below half capacity.",
        ),
    )
    full = client.get("/clusters").json()
    assert full["total"] == 2 and len(full["clusters"]) == 2
    page = client.get("/clusters", params={"offset": 1, "limit": 1}).json()
    assert page["total"] == 2 and len(page["clusters"]) == 1
    assert page["clusters"][0] == full["clusters"][1]
    cid = full["clusters"][0]["community_id"]
    assert client.get(f"/clusters/{cid}").json() == full["clusters"][0]
    assert client.get("/clusters/99999").status_code == 404


# ---------------------------------------------------------------------------
# durability: kill and restart
# ---------------------------------------------------------------------------

def random_corpus_state(tmp_path, rng, n_ops=60, snapshot_every=0):
    """Drive a state through a random mix of operations; returns the state and
    the extra store entries used for submissions."""
    extra = {f"submitted text {i}": rng.normal(0, 2, 2).tolist() for i in range(n_ops)}
    state = make_state(tmp_path, provider=store_provider(extra), snapshot_every=snapshot_every)
    sentences = list(SENTENCES)
    article_seq = 0
    claim_ids = []
    for i in range(n_ops):
        op = rng.integers(0, 3)
        if op == 0:
            k = int(rng.integers(1, 4))
            texts = [sentences[int(j)] for j in rng.integers(0, len(sentences), k)]
            art = Article(id=f"a{article_seq}", title="t", body=" ".join(texts))
            article_seq += 1
            for r in state.ingest_article(art):
                claim_ids.append(r.claim_id)
        elif op == 1:
            report, _ = state.submit_claim(f"submitted text {i}")
            claim_ids.append(report.claim_id)
        elif claim_ids:
            target = claim_ids[int(rng.integers(0, len(claim_ids)))]
            state.attach_factcheck(target, "false", f"note {i}")
    return state, extra


def observable_state(state):
    return {
        "edges": sorted(state.engine.edge_set()),
        "communities": dict(state.engine.communities),
        "articles": sorted(state.articles),
        "factchecks": {
            cid: c.factcheck.to_record()
            for cid, c in state.engine.claims.items()
            if c.factcheck is not None
        },
    }


def test_restart_replays_log_exactly(tmp_path, rng):
    state, extra = random_corpus_state(tmp_path, rng)
    before = observable_state(state)
    state.close()  # no snapshot was ever written; recovery is pure replay
    revived = make_state(tmp_path, provider=store_provider(extra))
    assert observable_state(revived) == before
    revived.close()


def test_restart_from_snapshot_plus_tail(tmp_path, rng):
    # snapshot every 5 events, so recovery combines a snapshot with a log tail
    state, extra = random_corpus_state(tmp_path, rng, n_ops=40, snapshot_every=5)
    before = observable_state(state)
    state.close()
    revived = make_state(tmp_path, provider=store_provider(extra), snapshot_every=5)
    assert observable_state(revived) == before
    # the revived service keeps working and stays durable
    revived.submit_claim("submitted text 0")
    after = observable_state(revived)
    revived.close()
    third = make_state(tmp_path, provider=store_provider(extra), snapshot_every=5)
    assert observable_state(third) == after
    third.close()


def test_replay_does_not_call_the_provider(tmp_path):
    state = make_state(tmp_path)
    state.ingest_article(Article(id="a1", title="t", body="Unemployment rose to seven percent."))
    state.close()

    class ExplodingProvider:
        dim = 2
        metric = Metric.EUCLIDEAN
        name = "exploding"

        def embed(self, texts):
            raise AssertionError("replay must not re-embed")

    revived = ServiceState(
        ServiceConfig(epsilon=1.0, dim=2, persistence_dir=str(tmp_path / "state")),
        provider=ExplodingProvider(),
    )
    assert len(revived.engine) == 1
    revived.close()


def test_duplicate_article_detected_across_restart(tmp_path):
    state = make_state(tmp_path)
    art = Article(id="a1", title="t", body="Unemployment rose to seven percent.")
    state.ingest_article(art)
    state.close()
    revived = make_state(tmp_path)
    with pytest.raises(DuplicateArticleError):
        revived.ingest_article(art)
    revived.close()


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def test_config_load_roundtrip(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(
        json.dumps(
            {
                "epsilon": 0.8,
                "dim": 64,
                "metric": "cosine-distance",
                "provider": {"type": "store", "path": "vectors.jsonl"},
                "latency_budget_ms": 250,
            }
        )
    )
    cfg = ServiceConfig.load(path)
    assert cfg.epsilon == 0.8
    assert cfg.metric is Metric.COSINE
    assert cfg.provider["type"] == "store"
    assert cfg.latency_budget_ms == 250


def test_config_validation():
    with pytest.raises(ValueError):
        ServiceConfig(epsilon=0.0, dim=2)
    with pytest.raises(ValueError):
        ServiceConfig(epsilon=1.0, dim=2, latency_budget_ms=0)


def test_build_provider_variants(tmp_path):
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("rates rose sharply\nrates fell sharply\n")
    cfg = ServiceConfig(
        epsilon=1.0,
        dim=16,
        metric=Metric.COSINE,
        provider={"type": "tfidf", "fit_corpus": str(corpus)},
    )
    provider = build_provider(cfg)
    assert provider.dim == 16
    # the provider always follows the configured metric so it agrees with the engine
    assert provider.metric is Metric.COSINE

    store = VectorStore(dim=3)
    store.put("x", [1.0, 2.0, 3.0])
    store_path = tmp_path / "vectors.jsonl"
    store.save(store_path)
    cfg = ServiceConfig(epsilon=1.0, dim=3, provider={"type": "store", "path": str(store_path)})
    assert build_provider(cfg).dim == 3

    cfg = ServiceConfig(
        epsilon=1.0,
        dim=4,
        provider={"type": "remote", "endpoint_url": "http://embedder.internal"},
    )
    remote = build_provider(cfg)
    assert remote.config.expected_dim == 4

    with pytest.raises(ValueError):
        build_provider(ServiceConfig(epsilon=1.0, dim=2, provider={"type": "nope"}))


def test_provider_dim_mismatch_rejected(tmp_path):
    cfg = ServiceConfig(epsilon=1.0, dim=5, persistence_dir=str(tmp_path / "s"))
    with pytest.raises(Exception):
        ServiceState(cfg, provider=store_provider())  # store dim is 2


def test_sentences_fixture_matches_splitter():
    # every table key must round-trip through the sentence splitter unchanged,
    # otherwise the store lookups above would silently test nothing
    body = " ".join(SENTENCES)
    got = [s.text for s in split_sentences(body, article_id="a")]
    assert got == list(SENTENCES)
