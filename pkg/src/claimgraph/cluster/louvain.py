"""Modularity and a deterministic two-phase Louvain community detection.

Graphs are adjacency mappings ``node -> neighbors`` where neighbors is either
an iterable of nodes (unweighted) or a ``neighbor -> weight`` mapping.
Self-loop weight is counted once in the mapping and contributes 2x its weight
to the node degree.
"""
from __future__ import annotations

import random
from typing import Dict, Hashable, Iterable, List, Mapping, Set, Tuple

from ..errors import UndefinedModularityError

_GAIN_EPS = 1e-12


def _as_weighted(adj: Mapping) -> Dict[Hashable, Dict[Hashable, float]]:
    out: Dict[Hashable, Dict[Hashable, float]] = {}
    for u, nbrs in adj.items():
        if isinstance(nbrs, Mapping):
            out[u] = {v: float(w) for v, w in nbrs.items()}
        else:
            out[u] = {v: 1.0 for v in nbrs}
    # symmetrize: an edge listed on one side only is still an edge
    for u, nbrs in list(out.items()):
        for v, w in nbrs.items():
            out.setdefault(v, {}).setdefault(u, w)
    return out


def modularity(adj: Mapping, partition: Mapping[Hashable, Hashable]) -> float:
    """Newman modularity Q = sum_c [in_c/(2m) - (tot_c/(2m))^2]."""
    g = _as_weighted(adj)
    degree: Dict[Hashable, float] = {}
    for u, nbrs in g.items():
        degree[u] = sum(w for v, w in nbrs.items() if v != u) + 2.0 * nbrs.get(u, 0.0)
    m2 = sum(degree.values())
    if m2 <= 0:
        raise UndefinedModularityError("modularity undefined on an edgeless graph")
    in_c: Dict[Hashable, float] = {}
    tot_c: Dict[Hashable, float] = {}
    for u, nbrs in g.items():
        c = partition[u]
        tot_c[c] = tot_c.get(c, 0.0) + degree[u]
        intra = sum(w for v, w in nbrs.items() if v != u and partition[v] == c)
        in_c[c] = in_c.get(c, 0.0) + intra + 2.0 * nbrs.get(u, 0.0)
    return sum(in_c.get(c, 0.0) / m2 - (tot_c[c] / m2) ** 2 for c in tot_c)


def connected_components(adj: Mapping) -> List[Set[Hashable]]:
    g = _as_weighted(adj)
    seen: Set[Hashable] = set()
    comps = []
    for start in g:
        if start in seen:
            continue
        comp = {start}
        stack = [start]
        seen.add(start)
        while stack:
            u = stack.pop()
            for v in g[u]:
                if v not in seen:
                    seen.add(v)
                    comp.add(v)
                    stack.append(v)
        comps.append(comp)
    return comps


def _one_level(
    g: Dict[Hashable, Dict[Hashable, float]],
    order: List[Hashable],
    m2_override: float | None = None,
) -> Tuple[Dict[Hashable, int], bool]:
    """Local-move phase: greedily move nodes to the best-gain neighbor
    community until no move improves modularity. Community labels are ints."""
    label = {u: i for i, u in enumerate(sorted(g, key=repr))}
    degree = {
        u: sum(w for v, w in nbrs.items() if v != u) + 2.0 * nbrs.get(u, 0.0)
        for u, nbrs in g.items()
    }
    m2 = m2_override if m2_override is not None else sum(degree.values())
    com = {u: label[u] for u in g}
    tot = {label[u]: degree[u] for u in g}
    moved_any = False
    improved = True
    while improved:
        improved = False
        for u in order:
            cu = com[u]
            ku = degree[u]
            # weight from u to each neighboring community (self-loops excluded)
            w_to: Dict[int, float] = {}
            for v, w in g[u].items():
                if v != u:
                    w_to[com[v]] = w_to.get(com[v], 0.0) + w
            tot[cu] -= ku
            # gain of joining c (relative, common 1/m factor dropped)
            def gain(c: int) -> float:
                return w_to.get(c, 0.0) - tot.get(c, 0.0) * ku / m2
            own_gain = gain(cu)
            best_c, best_gain = cu, own_gain
            for c in sorted(w_to):
                if c == cu:
                    continue
                gc = gain(c)
                if gc > best_gain + _GAIN_EPS or (
                    abs(gc - best_gain) <= _GAIN_EPS and best_c != cu and c < best_c
                ):
                    best_c, best_gain = c, gc
            # move only on strict improvement, so every move raises Q
            if best_c != cu and best_gain > own_gain + _GAIN_EPS:
                com[u] = best_c
                improved = True
                moved_any = True
                tot[best_c] = tot.get(best_c, 0.0) + ku
            else:
                tot[cu] += ku
    return com, moved_any


def _aggregate(
    g: Dict[Hashable, Dict[Hashable, float]], com: Dict[Hashable, int]
) -> Dict[int, Dict[int, float]]:
    agg: Dict[int, Dict[int, float]] = {c: {} for c in set(com.values())}
    for u, nbrs in g.items():
        cu = com[u]
        for v, w in nbrs.items():
            cv = com[v]
            if u == v:
                agg[cu][cu] = agg[cu].get(cu, 0.0) + w
            elif cu == cv:
                # each unordered intra pair appears twice in the adjacency
                agg[cu][cu] = agg[cu].get(cu, 0.0) + w / 2.0
            else:
                agg[cu][cv] = agg[cu].get(cv, 0.0) + w / 2.0
                agg[cv][cu] = agg[cv].get(cu, 0.0) + w / 2.0
    return agg


def louvain(
    adj: Mapping,
    seed: int = 0,
    return_history: bool = False,
    m2_override: float | None = None,
):
    """Two-phase Louvain to a local modularity optimum.

    Deterministic for a given seed (the seed shuffles node visit order; gain
    ties break toward the smallest community label). Every returned community
    induces a connected subgraph, and labels are dense ints from 0 ordered by
    each community's smallest node.

    ``m2_override`` substitutes a larger graph's total degree (2m) into the
    gain normalization. Used for incremental recompute of one connected
    component of a bigger graph: the component has no external edges, so
    moves then rank exactly as whole-graph modularity changes.
    """
    g = _as_weighted(adj)
    if not g:
        return ({}, []) if return_history else {}
    rng = random.Random(seed)
    node_to_com: Dict[Hashable, Hashable] = {u: u for u in g}
    current = g
    history: List[float] = []
    has_edges = any(v != u for u, nbrs in g.items() for v in nbrs)
    if has_edges:
        while True:
            order = sorted(current, key=repr)
            rng.shuffle(order)
            com, moved = _one_level(current, order, m2_override=m2_override)
            if not moved:
                break
            node_to_com = {u: com[node_to_com[u]] for u in node_to_com}
            history.append(modularity(g, node_to_com))
            current = _aggregate(current, com)
    # split any disconnected community into its components (never lowers Q)
    final = _split_disconnected(g, node_to_com)
    # dense labels, ordered by each community's smallest node
    groups: Dict[Hashable, List[Hashable]] = {}
    for u, c in final.items():
        groups.setdefault(c, []).append(u)
    ordered = sorted(groups.values(), key=lambda members: min(repr(x) for x in members))
    partition = {u: i for i, members in enumerate(ordered) for u in members}
    if return_history:
        return partition, history
    return partition


def _split_disconnected(
    g: Dict[Hashable, Dict[Hashable, float]], part: Dict[Hashable, Hashable]
) -> Dict[Hashable, Tuple]:
    groups: Dict[Hashable, Set[Hashable]] = {}
    for u, c in part.items():
        groups.setdefault(c, set()).add(u)
    out: Dict[Hashable, Tuple] = {}
    for c, members in groups.items():
        sub = {u: {v: w for v, w in g[u].items() if v in members} for u in members}
        for i, comp in enumerate(connected_components(sub)):
            for u in comp:
                out[u] = (c, i)
    return out
