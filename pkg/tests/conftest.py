import numpy as np
import pytest

from claimgraph.core import Claim, Sentence


def make_claim(i: int, vector, score: float = 0.9) -> Claim:
    return Claim(
        id=f"c{i:05d}",
        sentence=Sentence(text=f"claim {i}", article_id="fixture", char_start=0, char_end=7),
        embedding=np.asarray(vector, dtype=np.float32),
        detection_score=score,
    )


def blob_points(rng, num_blobs: int, per_blob: int, dim: int, spread: float = 10.0, std: float = 0.1):
    """Well-separated gaussian blobs; returns (vectors, blob_labels)."""
    centers = rng.normal(0.0, spread, size=(num_blobs, dim))
    vectors, labels = [], []
    for b in range(num_blobs):
        for _ in range(per_blob):
            vectors.append((centers[b] + rng.normal(0.0, std, dim)).astype(np.float32))
            labels.append(b)
    return vectors, labels


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
