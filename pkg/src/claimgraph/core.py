"""Shared domain types and vector/metric primitives.

Vectors are plain numpy arrays: float32 at rest (storage, wire, snapshots),
float64 inside distance accumulation.
"""
from __future__ import annotations

from dataclasses import dataclass, field, asdict
from enum import Enum
from typing import Iterable, Optional

import numpy as np

from .errors import DimensionError, DegenerateVectorError


class Metric(str, Enum):
    EUCLIDEAN = "euclidean"
    COSINE = "cosine-distance"


class Category(str, Enum):
    CHECKABLE = "checkable"
    PREDICTION = "prediction"
    PERSONAL_EXPERIENCE = "personal_experience"
    NOT_CLAIM = "not_claim"


class Verdict(str, Enum):
    TRUE = "true"
    FALSE = "false"
    MISLEADING = "misleading"
    UNVERIFIABLE = "unverifiable"


def as_vector(values: Iterable[float]) -> np.ndarray:
    """Validate and coerce a sequence of reals into a float32 embedding vector."""
    arr = np.asarray(values, dtype=np.float32)
    if arr.ndim != 1 or arr.size < 1:
        raise DimensionError(f"embedding must be a non-empty 1-d vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DegenerateVectorError("embedding contains NaN or infinity")
    return arr


def distance(a: np.ndarray, b: np.ndarray, metric: Metric = Metric.EUCLIDEAN) -> float:
    """Distance between two vectors of equal dimension.

    Euclidean uses float64 accumulation; cosine-distance is 1 - cos(a, b),
    clamped into [0, 2], and undefined for a zero vector.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    a64 = a.astype(np.float64)
    b64 = b.astype(np.float64)
    if metric is Metric.EUCLIDEAN:
        diff = a64 - b64
        return float(np.sqrt(np.dot(diff, diff)))
    na = float(np.linalg.norm(a64))
    nb = float(np.linalg.norm(b64))
    if na == 0.0 or nb == 0.0:
        raise DegenerateVectorError("cosine distance undefined for a zero vector")
    cos = float(np.dot(a64, b64)) / (na * nb)
    return float(min(2.0, max(0.0, 1.0 - cos)))


@dataclass(frozen=True)
class Sentence:
    text: str
    article_id: str
    char_start: int
    char_end: int

    def __post_init__(self):
        if not (0 <= self.char_start < self.char_end):
            raise ValueError(f"bad sentence offsets [{self.char_start}, {self.char_end})")


@dataclass(frozen=True)
class Factcheck:
    verdict: Verdict
    note: str
    checked_at: str  # ISO-8601 timestamp
    source_claim_id: str

    def to_record(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "note": self.note,
            "checked_at": self.checked_at,
            "source_claim_id": self.source_claim_id,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Factcheck":
        return cls(
            verdict=Verdict(rec["verdict"]),
            note=rec["note"],
            checked_at=rec["checked_at"],
            source_claim_id=rec["source_claim_id"],
        )


@dataclass
class Claim:
    id: str
    sentence: Sentence
    embedding: np.ndarray
    detection_score: float
    category: Category = Category.CHECKABLE
    factcheck: Optional[Factcheck] = None

    def __post_init__(self):
        self.embedding = as_vector(self.embedding)
        if not (0.0 <= self.detection_score <= 1.0):
            raise ValueError(f"detection_score out of [0,1]: {self.detection_score}")

    def to_record(self) -> dict:
        """Serializable record; vector values quantized to float32."""
        return {
            "id": self.id,
            "text": self.sentence.text,
            "article_id": self.sentence.article_id,
            "char_start": self.sentence.char_start,
            "char_end": self.sentence.char_end,
            "detection_score": self.detection_score,
            "category": self.category.value,
            "vector": [float(v) for v in self.embedding],
            "factcheck": self.factcheck.to_record() if self.factcheck else None,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Claim":
        fc = rec.get("factcheck")
        return cls(
            id=rec["id"],
            sentence=Sentence(
                text=rec["text"],
                article_id=rec["article_id"],
                char_start=rec["char_start"],
                char_end=rec["char_end"],
            ),
            embedding=np.asarray(rec["vector"], dtype=np.float32),
            detection_score=rec["detection_score"],
            category=Category(rec["category"]),
            factcheck=Factcheck.from_record(fc) if fc else None,
        )
