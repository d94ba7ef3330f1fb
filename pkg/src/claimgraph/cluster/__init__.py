from .louvain import modularity, louvain, connected_components
from .dbscan import NOISE, DbscanResult, dbscan
from .graph import ClaimGraph, InsertionReport

__all__ = [
    "modularity",
    "louvain",
    "connected_components",
    "NOISE",
    "DbscanResult",
    "dbscan",
    "ClaimGraph",
    "InsertionReport",
]
