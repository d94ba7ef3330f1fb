import random

import pytest

from claimgraph.cluster import connected_components, louvain, modularity
from claimgraph.errors import UndefinedModularityError
from oracles import best_partition_exhaustive, reference_modularity

TRIANGLES = {0: {1, 2}, 1: {0, 2}, 2: {0, 1}, 3: {4, 5}, 4: {3, 5}, 5: {3, 4}}


def random_graph(n, p, seed):
    rng = random.Random(seed)
    adj = {i: set() for i in range(n)}
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                adj[i].add(j)
                adj[j].add(i)
                edges.append((i, j))
    return adj, edges


def graph_fixtures(count=25, max_nodes=7):
    """Small random graphs with at least one edge."""
    out = []
    seed = 0
    while len(out) < count:
        n = 3 + seed % (max_nodes - 2)
        adj, edges = random_graph(n, 0.45, seed)
        seed += 1
        if edges:
            out.append((adj, edges))
    return out


def test_single_community_modularity_is_zero():
    adj, _ = random_graph(6, 0.5, 1)
    partition = {u: 0 for u in adj}
    assert modularity(adj, partition) == pytest.approx(0.0, abs=1e-12)


def test_two_triangles_modularity_half():
    partition = {0: 0, 1: 0, 2: 0, 3: 1, 4: 1, 5: 1}
    assert modularity(TRIANGLES, partition) == pytest.approx(0.5, abs=1e-12)


def test_modularity_matches_reference_on_random_partitions():
    rng = random.Random(9)
    for adj, edges in graph_fixtures(10):
        partition = {u: rng.randrange(3) for u in adj}
        assert modularity(adj, partition) == pytest.approx(
            reference_modularity(edges, partition), abs=1e-12
        )


def test_edgeless_graph_rejected():
    with pytest.raises(UndefinedModularityError):
        modularity({0: set(), 1: set()}, {0: 0, 1: 1})


def test_louvain_two_triangles_recovered():
    partition = louvain(TRIANGLES, seed=0)
    assert len(set(partition.values())) == 2
    assert partition[0] == partition[1] == partition[2]
    assert partition[3] == partition[4] == partition[5]
    assert modularity(TRIANGLES, partition) == pytest.approx(0.5, abs=1e-12)


def test_louvain_barbell_recovers_cliques():
    adj = {i: set() for i in range(10)}
    for group in (range(5), range(5, 10)):
        for i in group:
            for j in group:
                if i != j:
                    adj[i].add(j)
    adj[4].add(5)
    adj[5].add(4)
    partition = louvain(adj, seed=3)
    assert {frozenset(u for u in adj if partition[u] == c) for c in set(partition.values())} == {
        frozenset(range(5)),
        frozenset(range(5, 10)),
    }


def test_louvain_never_spans_components():
    for seed in range(5):
        adj, edges = random_graph(10, 0.3, seed + 100)
        partition = louvain(adj, seed=seed)
        for comp in connected_components(adj):
            comp_coms = {partition[u] for u in comp}
            other_coms = {partition[u] for u in adj if u not in comp}
            assert not (comp_coms & other_coms)


def test_louvain_near_exhaustive_optimum_on_small_graphs():
    for adj, edges in graph_fixtures(25):
        partition = louvain(adj, seed=0)
        q = modularity(adj, partition)
        best_q, _ = best_partition_exhaustive(list(adj), edges)
        assert q <= best_q + 1e-9
        assert q >= best_q - 0.05


def test_louvain_modularity_never_decreases_between_passes():
    for adj, edges in graph_fixtures(25):
        _, history = louvain(adj, seed=0, return_history=True)
        for a, b in zip(history, history[1:]):
            assert b >= a - 1e-12


def test_louvain_deterministic_given_seed():
    adj, _ = random_graph(30, 0.15, 42)
    assert louvain(adj, seed=5) == louvain(adj, seed=5)


def test_louvain_communities_connected():
    for seed in range(8):
        adj, edges = random_graph(20, 0.12, seed)
        partition = louvain(adj, seed=seed)
        groups = {}
        for u, c in partition.items():
            groups.setdefault(c, set()).add(u)
        for members in groups.values():
            sub = {u: {v for v in adj[u] if v in members} for u in members}
            assert len(connected_components(sub)) == 1


def test_partition_labels_dense_from_zero():
    adj, _ = random_graph(15, 0.2, 7)
    partition = louvain(adj, seed=0)
    labels = set(partition.values())
    assert labels == set(range(len(labels)))
