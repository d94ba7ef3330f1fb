"""Pluggable embedding providers.

Three providers share one contract: ``embed(texts) -> list of float32 vectors``
of a fixed dimension.

* TF-IDF baseline with signed feature hashing into the engine dimension.
* Precomputed vector store (JSON Lines file) for externally computed
  embeddings.
* HTTP client for a remote embedding service.
"""
from __future__ import annotations

import hashlib
import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Protocol, Sequence, Tuple

import httpx
import numpy as np

from .core import Metric, as_vector
from .errors import (
    CorpusFormatError,
    DegenerateVectorError,
    DimensionError,
    EmptyCorpusError,
    MissingVectorError,
    RemoteProtocolError,
    RemoteTimeoutError,
)


class EmbeddingProvider(Protocol):
    dim: int
    metric: Metric
    name: str

    def embed(self, texts: Sequence[str]) -> List[np.ndarray]: ...


# ---------------------------------------------------------------------------
# TF-IDF baseline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TokenizerConfig:
    lowercase: bool = True
    token_pattern: str = r"[a-z0-9]+"
    min_token_len: int = 2


def tokenize(text: str, cfg: TokenizerConfig = TokenizerConfig()) -> List[str]:
    if cfg.lowercase:
        text = text.lower()
    pattern = cfg.token_pattern if cfg.lowercase else cfg.token_pattern.replace("a-z", "a-zA-Z")
    return [t for t in re.findall(pattern, text) if len(t) >= cfg.min_token_len]


@dataclass
class TfidfModel:
    """Vocabulary with smoothed idf weights plus a hashing projection dim."""

    vocabulary: Dict[str, Tuple[int, float]]  # token -> (index, idf)
    num_documents: int
    hash_dim: int
    tokenizer: TokenizerConfig = TokenizerConfig()

    @property
    def oov_idf(self) -> float:
        # idf of a token never seen in the corpus (document frequency 0)
        return math.log(1 + self.num_documents) + 1.0


def fit_tfidf(
    corpus: Sequence[str],
    hash_dim: int,
    tokenizer: TokenizerConfig = TokenizerConfig(),
) -> TfidfModel:
    """Fit idf weights on a corpus: idf(t) = ln((1+N)/(1+df(t))) + 1."""
    if not corpus:
        raise EmptyCorpusError("cannot fit TF-IDF on an empty corpus")
    if hash_dim < 1:
        raise DimensionError(f"hash_dim must be >= 1, got {hash_dim}")
    df: Counter = Counter()
    for doc in corpus:
        df.update(set(tokenize(doc, tokenizer)))
    n = len(corpus)
    vocab = {
        tok: (i, math.log((1 + n) / (1 + df[tok])) + 1.0)
        for i, tok in enumerate(sorted(df))
    }
    return TfidfModel(vocabulary=vocab, num_documents=n, hash_dim=hash_dim, tokenizer=tokenizer)


def save_tfidf_model(model: TfidfModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(
            {
                "num_documents": model.num_documents,
                "hash_dim": model.hash_dim,
                "tokenizer": {
                    "lowercase": model.tokenizer.lowercase,
                    "token_pattern": model.tokenizer.token_pattern,
                    "min_token_len": model.tokenizer.min_token_len,
                },
                "vocabulary": {t: [i, w] for t, (i, w) in model.vocabulary.items()},
            },
            f,
        )


def load_tfidf_model(path: str | Path) -> TfidfModel:
    with open(path, "r", encoding="utf-8") as f:
        rec = json.load(f)
    tok = rec.get("tokenizer", {})
    return TfidfModel(
        vocabulary={t: (int(i), float(w)) for t, (i, w) in rec["vocabulary"].items()},
        num_documents=int(rec["num_documents"]),
        hash_dim=int(rec["hash_dim"]),
        tokenizer=TokenizerConfig(
            lowercase=tok.get("lowercase", True),
            token_pattern=tok.get("token_pattern", r"[a-z0-9]+"),
            min_token_len=tok.get("min_token_len", 2),
        ),
    )


def l2_normalize(vec: np.ndarray) -> np.ndarray:
    """Scale to unit length; raises on a zero vector."""
    norm = float(np.linalg.norm(np.asarray(vec, dtype=np.float64)))
    if norm == 0.0:
        raise DegenerateVectorError("cannot normalize a zero vector")
    return (np.asarray(vec, dtype=np.float64) / norm).astype(np.float32)


def _hash_token(token: str) -> int:
    # stable across processes, unlike the builtin salted hash()
    return int.from_bytes(hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest(), "big")


def embed_tfidf(model: TfidfModel, text: str) -> np.ndarray:
    """Signed-hash a sparse tf-idf vector into model.hash_dim and L2-normalize.

    Empty token set yields the zero vector (the one un-normalizable output).
    """
    vec = np.zeros(model.hash_dim, dtype=np.float64)
    for token, tf in Counter(tokenize(text, model.tokenizer)).items():
        entry = model.vocabulary.get(token)
        idf = entry[1] if entry is not None else model.oov_idf
        h = _hash_token(token)
        sign = 1.0 if h & 1 else -1.0
        vec[(h >> 1) % model.hash_dim] += sign * tf * idf
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    return vec.astype(np.float32)


@dataclass
class TfidfProvider:
    model: TfidfModel
    metric: Metric = Metric.COSINE  # sparse-ish baseline pairs with cosine by default
    name: str = "tfidf"

    @property
    def dim(self) -> int:
        return self.model.hash_dim

    def embed(self, texts: Sequence[str]) -> List[np.ndarray]:
        return [embed_tfidf(self.model, t) for t in texts]


# ---------------------------------------------------------------------------
# Precomputed vector store
# ---------------------------------------------------------------------------

@dataclass
class VectorStore:
    """Exact-text-keyed store of precomputed vectors, one dim for all."""

    dim: int
    provider_name: str = "store"
    entries: Dict[str, np.ndarray] = field(default_factory=dict)

    def put(self, text: str, vector) -> None:
        vec = as_vector(vector)
        if vec.size != self.dim:
            raise DimensionError(f"vector dim {vec.size} != store dim {self.dim}")
        self.entries[text] = vec

    def lookup(self, text: str) -> np.ndarray:
        try:
            return self.entries[text]
        except KeyError:
            raise MissingVectorError(f"no stored vector for text: {text[:80]!r}") from None

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(json.dumps({"dim": self.dim, "provider": self.provider_name}) + "\n")
            for text, vec in self.entries.items():
                f.write(json.dumps({"text": text, "vector": [float(v) for v in vec]}) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "VectorStore":
        with open(path, "r", encoding="utf-8") as f:
            header = f.readline()
            if not header.strip():
                raise CorpusFormatError(f"{path}: missing manifest line")
            try:
                manifest = json.loads(header)
                dim = int(manifest["dim"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                raise CorpusFormatError(f"{path}: bad manifest: {e}") from e
            store = cls(dim=dim, provider_name=str(manifest.get("provider", "store")))
            for lineno, line in enumerate(f, start=2):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                    text, vector = rec["text"], rec["vector"]
                except (json.JSONDecodeError, KeyError, TypeError) as e:
                    raise CorpusFormatError(f"{path}:{lineno}: bad entry: {e}") from e
                if len(vector) != dim:
                    raise CorpusFormatError(
                        f"{path}:{lineno}: vector length {len(vector)} != declared dim {dim}"
                    )
                store.entries[text] = np.asarray(vector, dtype=np.float32)
        return store


@dataclass
class StoreProvider:
    store: VectorStore
    metric: Metric = Metric.EUCLIDEAN
    normalize: bool = False  # unit-length output, off unless configured

    @property
    def dim(self) -> int:
        return self.store.dim

    @property
    def name(self) -> str:
        return self.store.provider_name

    def embed(self, texts: Sequence[str]) -> List[np.ndarray]:
        vectors = [self.store.lookup(t) for t in texts]
        if self.normalize:
            vectors = [l2_normalize(v) for v in vectors]
        return vectors


# ---------------------------------------------------------------------------
# Remote embedding service client
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RemoteEmbedderConfig:
    endpoint_url: str
    expected_dim: int
    timeout_ms: int = 10_000
    batch_size: int = 32

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


def embed_remote(
    cfg: RemoteEmbedderConfig,
    texts: Sequence[str],
    transport: httpx.BaseTransport | None = None,
) -> List[np.ndarray]:
    """POST {endpoint_url}/embed in batches; one vector per text, in order.

    ``transport`` overrides the HTTP transport (mocking in tests).
    """
    out: List[np.ndarray] = []
    timeout = cfg.timeout_ms / 1000.0
    with httpx.Client(timeout=timeout, transport=transport) as client:
        for start in range(0, len(texts), cfg.batch_size):
            batch = list(texts[start : start + cfg.batch_size])
            try:
                resp = client.post(f"{cfg.endpoint_url}/embed", json={"texts": batch})
            except httpx.TimeoutException as e:
                raise RemoteTimeoutError(f"embedding request timed out after {timeout}s") from e
            except httpx.HTTPError as e:
                raise RemoteProtocolError(f"embedding request failed: {e}") from e
            if not (200 <= resp.status_code < 300):
                raise RemoteProtocolError(f"embedding service returned {resp.status_code}")
            try:
                vectors = resp.json()["vectors"]
            except (json.JSONDecodeError, KeyError) as e:
                raise RemoteProtocolError(f"malformed embedding response: {e}") from e
            if len(vectors) != len(batch):
                raise RemoteProtocolError(
                    f"expected {len(batch)} vectors, got {len(vectors)}"
                )
            for vec in vectors:
                if len(vec) != cfg.expected_dim:
                    raise DimensionError(
                        f"remote vector dim {len(vec)} != expected {cfg.expected_dim}"
                    )
                out.append(np.asarray(vec, dtype=np.float32))
    return out


@dataclass
class RemoteProvider:
    config: RemoteEmbedderConfig
    metric: Metric = Metric.EUCLIDEAN
    name: str = "remote"
    transport: httpx.BaseTransport | None = None
    normalize: bool = False

    @property
    def dim(self) -> int:
        return self.config.expected_dim

    def embed(self, texts: Sequence[str]) -> List[np.ndarray]:
        vectors = embed_remote(self.config, texts, transport=self.transport)
        if self.normalize:
            vectors = [l2_normalize(v) for v in vectors]
        return vectors
