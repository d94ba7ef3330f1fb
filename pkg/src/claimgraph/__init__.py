"""claimgraph: online claim detection and incremental claim clustering."""

from .core import Category, Claim, Factcheck, Metric, Sentence, Verdict, distance
from .cluster import ClaimGraph, DbscanResult, InsertionReport, dbscan, louvain, modularity

__version__ = "0.1.0"

__all__ = [
    "Category",
    "Claim",
    "ClaimGraph",
    "DbscanResult",
    "Factcheck",
    "InsertionReport",
    "Metric",
    "Sentence",
    "Verdict",
    "dbscan",
    "distance",
    "louvain",
    "modularity",
    "__version__",
]
