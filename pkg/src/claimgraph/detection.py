"""Sentence splitting and claim classification.

A sentence is embedded (any provider) and scored by a logistic-regression
classifier; rule-based category filters then drop predictions and personal
anecdotes before claims enter the cluster engine.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np

from .core import Category, Claim, Sentence
from .errors import AlignmentError, DegenerateLabelsError, DimensionError

# Words that end in '.' without ending a sentence.
ABBREVIATIONS = {
    "dr", "mr", "mrs", "ms", "prof", "rev", "hon", "st", "jr", "sr",
    "vs", "etc", "inc", "ltd", "co", "corp", "gov", "dept", "approx",
    "no", "fig", "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep",
    "sept", "oct", "nov", "dec", "mon", "tue", "wed", "thu", "fri", "sat", "sun",
}

_BOUNDARY = re.compile(r"[.!?]+(?=\s)")


def split_sentences(article_text: str, article_id: str = "") -> List[Sentence]:
    """Split on ./!/? followed by whitespace and a capital, with an
    abbreviation exception list. Offsets always slice the original text."""
    spans: List[Tuple[int, int]] = []
    start = None
    i = 0
    n = len(article_text)
    while i < n:
        ch = article_text[i]
        if start is None:
            if not ch.isspace():
                start = i
            i += 1
            continue
        m = _BOUNDARY.match(article_text, i)
        if m is None:
            i += 1
            continue
        end = m.end()
        # require whitespace then a capital (or digit) to accept the boundary
        j = end
        while j < n and article_text[j].isspace():
            j += 1
        if j >= n or not (article_text[j].isupper() or article_text[j].isdigit()):
            i = end
            continue
        if article_text[i] == ".":
            word = re.search(r"([A-Za-z]+)$", article_text[start:i])
            w = word.group(1) if word else ""
            # single capital letters are initials ("J. Smith"), not boundaries
            if w and (w.lower() in ABBREVIATIONS or (len(w) == 1 and w.isupper())):
                i = end
                continue
        spans.append((start, end))
        start = None
        i = j
    if start is not None:
        end = n
        while end > start and article_text[end - 1].isspace():
            end -= 1
        if end > start:
            spans.append((start, end))
    return [
        Sentence(text=article_text[a:b], article_id=article_id, char_start=a, char_end=b)
        for a, b in spans
    ]


# ---------------------------------------------------------------------------
# Logistic-regression claim classifier
# ---------------------------------------------------------------------------

@dataclass
class ClaimClassifier:
    weights: np.ndarray
    bias: float
    threshold: float = 0.5
    l2_lambda: float = 0.0

    @property
    def dim(self) -> int:
        return int(self.weights.size)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(
                {
                    "dim": self.dim,
                    "weights": [float(w) for w in self.weights],
                    "bias": float(self.bias),
                    "threshold": float(self.threshold),
                },
                f,
            )

    @classmethod
    def load(cls, path: str | Path) -> "ClaimClassifier":
        with open(path, "r", encoding="utf-8") as f:
            rec = json.load(f)
        return cls(
            weights=np.asarray(rec["weights"], dtype=np.float64),
            bias=float(rec["bias"]),
            threshold=float(rec["threshold"]),
        )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return np.where(z >= 0, 1.0 / (1.0 + np.exp(-z)), np.exp(z) / (1.0 + np.exp(z)))


def logistic_loss(X: np.ndarray, y: np.ndarray, w: np.ndarray, b: float, lam: float) -> float:
    """Mean cross-entropy plus (lam/2)||w||^2; the bias is unregularized."""
    z = X @ w + b
    # log(1+exp(z)) - y*z, computed stably
    ce = np.logaddexp(0.0, z) - y * z
    return float(np.mean(ce) + 0.5 * lam * np.dot(w, w))


def logistic_gradient(
    X: np.ndarray, y: np.ndarray, w: np.ndarray, b: float, lam: float
) -> Tuple[np.ndarray, float]:
    p = _sigmoid(X @ w + b)
    resid = p - y
    grad_w = X.T @ resid / len(y) + lam * w
    grad_b = float(np.mean(resid))
    return grad_w, grad_b


def train_classifier(
    data: Sequence[Tuple[np.ndarray, int]],
    l2_lambda: float = 0.0,
    learning_rate: float = 0.5,
    epochs: int = 500,
    seed: int = 0,
    threshold: float = 0.5,
) -> ClaimClassifier:
    """Full-batch gradient descent on L2-regularized logistic loss.

    Deterministic given the seed (used only for the tiny weight init).
    """
    if not data:
        raise DegenerateLabelsError("no training data")
    X = np.asarray([np.asarray(v, dtype=np.float64) for v, _ in data])
    y = np.asarray([float(lbl) for _, lbl in data])
    if len(set(y.tolist())) < 2:
        raise DegenerateLabelsError("training data contains a single class")
    dims = {row.size for row in X}
    if len(dims) != 1:
        raise DimensionError(f"inconsistent feature dims: {sorted(dims)}")
    rng = np.random.default_rng(seed)
    w = rng.normal(0.0, 1e-3, size=X.shape[1])
    b = 0.0
    for _ in range(epochs):
        grad_w, grad_b = logistic_gradient(X, y, w, b, l2_lambda)
        w -= learning_rate * grad_w
        b -= learning_rate * grad_b
    return ClaimClassifier(weights=w, bias=b, threshold=threshold, l2_lambda=l2_lambda)


def predict(classifier: ClaimClassifier, v: np.ndarray) -> Tuple[float, bool]:
    """Score = sigmoid(w.v + b); claim iff score >= threshold."""
    v = np.asarray(v, dtype=np.float64)
    if v.size != classifier.dim:
        raise DimensionError(f"input dim {v.size} != classifier dim {classifier.dim}")
    score = float(_sigmoid(np.asarray(classifier.weights @ v + classifier.bias)))
    return score, score >= classifier.threshold


# ---------------------------------------------------------------------------
# Rule-based category assignment and filtering
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FilterRules:
    prediction_markers: Tuple[str, ...] = ("will", "going to", "is expected to", "shall")
    first_person: Tuple[str, ...] = ("i", "we", "my", "our", "me", "us")
    experience_markers: Tuple[str, ...] = (
        "saw", "felt", "feel", "believe", "think", "heard", "experienced",
        "in my view", "in our view", "in my opinion",
    )
    drop: Tuple[Category, ...] = (Category.PREDICTION, Category.PERSONAL_EXPERIENCE)


def _contains_marker(words: set, text_lower: str, markers: Tuple[str, ...]) -> bool:
    for m in markers:
        if " " in m:
            if m in text_lower:
                return True
        elif m in words:
            return True
    return False


def categorize(text: str, rules: FilterRules = FilterRules()) -> Category:
    """Assign a category from keyword/pattern rules; default is checkable."""
    lower = text.lower()
    words = set(re.findall(r"[a-z']+", lower))
    if _contains_marker(words, lower, rules.prediction_markers):
        return Category.PREDICTION
    if _contains_marker(words, lower, rules.first_person) and _contains_marker(
        words, lower, rules.experience_markers
    ):
        return Category.PERSONAL_EXPERIENCE
    return Category.CHECKABLE


def filter_categories(claims: Sequence[Claim], rules: FilterRules = FilterRules()) -> List[Claim]:
    """Categorize each claim from its text, then drop the configured categories."""
    kept = []
    for claim in claims:
        claim.category = categorize(claim.sentence.text, rules)
        if claim.category not in rules.drop:
            kept.append(claim)
    return kept


def load_labeled_corpus(path: str | Path) -> List[Tuple[str, Category]]:
    """JSON Lines corpus: {"text": ..., "label": <category>} per line."""
    from .errors import CorpusFormatError

    out: List[Tuple[str, Category]] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                out.append((rec["text"], Category(rec["label"])))
            except (json.JSONDecodeError, KeyError, ValueError) as e:
                raise CorpusFormatError(f"{path}:{lineno}: {e}") from e
    return out


def evaluate_prf(predicted: Sequence[bool], gold: Sequence[bool]) -> Tuple[float, float, float]:
    """Precision, recall, F1 on the positive class; zero when undefined."""
    if len(predicted) != len(gold):
        raise AlignmentError(f"length mismatch: {len(predicted)} vs {len(gold)}")
    if not predicted:
        raise AlignmentError("empty inputs")
    tp = sum(1 for p, g in zip(predicted, gold) if p and g)
    fp = sum(1 for p, g in zip(predicted, gold) if p and not g)
    fn = sum(1 for p, g in zip(predicted, gold) if not p and g)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1
