"""Interval-keyword graph construction and community detection.

The graph is bipartite: one node per interval, one per keyword, with an edge
whenever the keyword appears in that interval's ranked selection. Community
detection runs a seeded two-phase Louvain that also accepts arbitrary
weighted adjacency mappings, so it is usable beyond the bipartite case.
"""

from __future__ import annotations

import logging
import random
from collections import defaultdict
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, Sequence

logger = logging.getLogger(__name__)

Node = Hashable
Adjacency = dict[Node, dict[Node, float]]


class GraphError(Exception):
    """Malformed graph input or an impossible graph operation."""


def interval_node(j: int) -> tuple[str, str]:
    return ("interval", f"t{j:02d}")


def keyword_node(stem: str) -> tuple[str, str]:
    return ("keyword", stem)


@dataclass(frozen=True)
class BipartiteGraph:
    interval_nodes: tuple[tuple[str, str], ...]
    keyword_nodes: tuple[tuple[str, str], ...]
    edges: tuple[tuple[tuple[str, str], tuple[str, str]], ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.edges) != len(self.weights):
            raise GraphError("edges and weights differ in length")
        nodes = set(self.interval_nodes) | set(self.keyword_nodes)
        for u, v in self.edges:
            if u not in nodes or v not in nodes:
                raise GraphError(f"edge {(u, v)} references an unknown node")

    @property
    def nodes(self) -> tuple[tuple[str, str], ...]:
        return self.interval_nodes + self.keyword_nodes

    def __len__(self) -> int:
        return len(self.interval_nodes) + len(self.keyword_nodes)

    def adjacency(self) -> Adjacency:
        adj: Adjacency = {v: {} for v in self.nodes}
        for (u, v), w in zip(self.edges, self.weights):
            adj[u][v] = adj[u].get(v, 0.0) + w
            adj[v][u] = adj[v].get(u, 0.0) + w
        return adj

    def degree(self, node: tuple[str, str]) -> int:
        return sum(1 for u, v in self.edges if u == node or v == node)


def build_bipartite(origins: Mapping[int, Sequence[str]]) -> BipartiteGraph:
    """Graph over the per-interval keyword selections.

    `origins` maps interval index (1-based) to the stems selected for that
    interval; every listed interval becomes a node even when its list is
    empty.
    """
    if not origins:
        raise GraphError("no interval selections to build a graph from")
    intervals = tuple(interval_node(j) for j in sorted(origins))
    stems = sorted({stem for listing in origins.values() for stem in listing})
    keywords = tuple(keyword_node(stem) for stem in stems)
    edges = []
    for j in sorted(origins):
        for stem in sorted(set(origins[j])):
            edges.append((interval_node(j), keyword_node(stem)))
    return BipartiteGraph(
        interval_nodes=intervals,
        keyword_nodes=keywords,
        edges=tuple(edges),
        weights=tuple(1.0 for _ in edges),
    )


def degree_distribution(graph: BipartiteGraph) -> dict[int, int]:
    """Histogram of keyword-node degrees (degree -> number of keywords)."""
    counts: dict[Node, int] = {v: 0 for v in graph.keyword_nodes}
    for u, v in graph.edges:
        if v in counts:
            counts[v] += 1
        if u in counts:
            counts[u] += 1
    histogram: dict[int, int] = {}
    for d in counts.values():
        histogram[d] = histogram.get(d, 0) + 1
    return dict(sorted(histogram.items()))


def filter_min_degree(graph: BipartiteGraph, min_degree: int) -> BipartiteGraph:
    """Drop keyword nodes below the degree threshold; intervals always stay."""
    if min_degree <= 0:
        return graph
    counts: dict[Node, int] = {v: 0 for v in graph.keyword_nodes}
    for u, v in graph.edges:
        if v in counts:
            counts[v] += 1
        if u in counts:
            counts[u] += 1
    kept = {v for v, d in counts.items() if d >= min_degree}
    edges = []
    weights = []
    for (u, v), w in zip(graph.edges, graph.weights):
        if (u not in counts or u in kept) and (v not in counts or v in kept):
            edges.append((u, v))
            weights.append(w)
    return BipartiteGraph(
        interval_nodes=graph.interval_nodes,
        keyword_nodes=tuple(v for v in graph.keyword_nodes if v in kept),
        edges=tuple(edges),
        weights=tuple(weights),
    )


def _as_adjacency(graph: BipartiteGraph | Mapping) -> Adjacency:
    if isinstance(graph, BipartiteGraph):
        return graph.adjacency()
    if not isinstance(graph, Mapping):
        raise GraphError(f"cannot interpret {type(graph).__name__} as a graph")
    adj: Adjacency = {v: {} for v in graph}
    for v, nbrs in graph.items():
        for u, w in nbrs.items():
            w = float(w)
            if w < 0:
                raise GraphError(f"negative edge weight on ({v!r}, {u!r})")
            if w == 0:
                continue
            adj.setdefault(u, {})
            existing = adj[v].get(u)
            if existing is not None and existing != w:
                raise GraphError(f"asymmetric weights on ({v!r}, {u!r})")
            adj[v][u] = w
            adj[u][v] = w
    return adj


def _normalize_partition(
    adj: Adjacency, partition
) -> list[tuple[Node, ...]]:
    if isinstance(partition, Partition):
        communities = [tuple(c) for c in partition.communities]
    elif isinstance(partition, Mapping):
        grouped: dict[Hashable, list[Node]] = defaultdict(list)
        for node, cid in partition.items():
            grouped[cid].append(node)
        communities = [tuple(grouped[cid]) for cid in sorted(grouped, key=repr)]
    else:
        communities = [tuple(c) for c in partition]
    seen: set[Node] = set()
    for community in communities:
        for node in community:
            if node not in adj:
                raise GraphError(f"partition mentions unknown node {node!r}")
            if node in seen:
                raise GraphError(f"node {node!r} appears in two communities")
            seen.add(node)
    if seen != set(adj):
        missing = sorted(set(adj) - seen, key=repr)[:3]
        raise GraphError(f"partition does not cover nodes such as {missing}")
    return communities


def _degrees(adj: Adjacency) -> dict[Node, float]:
    # a self-loop contributes twice to its endpoint's degree
    return {v: sum(nbrs.values()) + nbrs.get(v, 0.0) for v, nbrs in adj.items()}


def _q(adj: Adjacency, communities: Iterable[Iterable[Node]], resolution: float) -> float:
    degrees = _degrees(adj)
    two_m = sum(degrees.values())
    if two_m == 0:
        raise GraphError("graph has no edges; modularity is undefined")
    q = 0.0
    for community in communities:
        members = set(community)
        internal = 0.0
        degree_sum = 0.0
        for v in members:
            degree_sum += degrees[v]
            for u, w in adj[v].items():
                if u in members:
                    internal += w
            internal += adj[v].get(v, 0.0)
        # internal now counts every in-community edge twice (loops included)
        q += internal / two_m - resolution * (degree_sum / two_m) ** 2
    return q


def modularity(graph: BipartiteGraph | Mapping, partition) -> float:
    """Newman modularity of a node partition.

    Accepts a `Partition`, a node-to-community mapping, or an iterable of
    node collections. Each edge counts once toward the total weight m; a
    community's term is e_c/m - (d_c/2m)^2.
    """
    adj = _as_adjacency(graph)
    communities = _normalize_partition(adj, partition)
    return _q(adj, communities, resolution=1.0)


@dataclass(frozen=True)
class Partition:
    """Communities (each a sorted tuple of nodes) and their modularity."""

    communities: tuple[tuple[Node, ...], ...]
    q: float

    def __len__(self) -> int:
        return len(self.communities)

    def community_of(self, node: Node) -> int:
        for i, community in enumerate(self.communities):
            if node in community:
                return i
        raise KeyError(node)

    def as_mapping(self) -> dict[Node, int]:
        return {
            node: i for i, community in enumerate(self.communities) for node in community
        }


def _one_level(adj: Adjacency, rng: random.Random, resolution: float) -> dict[Node, int]:
    """Local-move phase; returns node -> community id (renumbered from 0)."""
    ordered = sorted(adj, key=repr)
    comm = {v: i for i, v in enumerate(ordered)}
    degrees = _degrees(adj)
    two_m = sum(degrees.values())
    comm_degree = defaultdict(float)
    for v, d in degrees.items():
        comm_degree[comm[v]] += d
    visit = list(ordered)
    rng.shuffle(visit)
    moved = True
    while moved:
        moved = False
        for v in visit:
            c_old = comm[v]
            link = defaultdict(float)
            for u, w in adj[v].items():
                if u != v:
                    link[comm[u]] += w
            comm_degree[c_old] -= degrees[v]
            best_c = c_old
            best_gain = link.get(c_old, 0.0) - resolution * degrees[v] * comm_degree[c_old] / two_m
            for c in sorted(link):
                if c == c_old:
                    continue
                gain = link[c] - resolution * degrees[v] * comm_degree[c] / two_m
                if gain > best_gain:
                    best_gain = gain
                    best_c = c
            comm[v] = best_c
            comm_degree[best_c] += degrees[v]
            if best_c != c_old:
                moved = True
    renumber = {c: i for i, c in enumerate(sorted(set(comm.values())))}
    return {v: renumber[c] for v, c in comm.items()}


def _aggregate(adj: Adjacency, comm: Mapping[Node, int]) -> Adjacency:
    agg: dict[Node, dict[Node, float]] = {c: defaultdict(float) for c in set(comm.values())}
    loops = defaultdict(float)
    for v, nbrs in adj.items():
        cv = comm[v]
        loops[cv] += nbrs.get(v, 0.0)
        for u, w in nbrs.items():
            agg[cv][comm[u]] += w
    for c in agg:
        # the double loop counted internal edges twice and loops once; fold
        # them into a single self-loop that preserves the community's degree
        inner = agg[c].pop(c, 0.0)
        loop = (inner + loops[c]) / 2.0
        if loop:
            agg[c][c] = loop
    return {c: dict(nbrs) for c, nbrs in agg.items()}


def louvain_detect(
    graph: BipartiteGraph | Mapping,
    seed: int = 0,
    resolution: float = 1.0,
    threshold: float = 1e-7,
) -> Partition:
    """Two-phase Louvain with a seeded visit order.

    Node visit order is a seeded shuffle of the nodes sorted by repr; move
    ties keep the current community, then prefer the lowest community id, so
    results are reproducible for a given seed. Levels repeat until the
    modularity gain drops below `threshold`.
    """
    if resolution <= 0:
        raise GraphError("resolution must be positive")
    adj = _as_adjacency(graph)
    if not adj:
        raise GraphError("cannot partition an empty graph")
    degrees = _degrees(adj)
    if sum(degrees.values()) == 0:
        raise GraphError("graph has no edges; communities are undefined")
    rng = random.Random(seed)

    def projected(meta_of: Mapping[Node, int]) -> list[tuple[Node, ...]]:
        grouped: dict[int, list[Node]] = defaultdict(list)
        for node, meta in meta_of.items():
            grouped[meta].append(node)
        return [tuple(grouped[c]) for c in sorted(grouped)]

    level = _one_level(adj, rng, resolution)
    meta_of = dict(level)
    current_q = _q(adj, projected(meta_of), resolution)
    work = _aggregate(adj, level)
    while len(work) > 1:
        level = _one_level(work, rng, resolution)
        candidate = {v: level[m] for v, m in meta_of.items()}
        new_q = _q(adj, projected(candidate), resolution)
        if new_q - current_q < threshold:
            break
        meta_of = candidate
        current_q = new_q
        work = _aggregate(work, level)
    communities = tuple(
        tuple(sorted(c, key=repr)) for c in projected(meta_of)
    )
    communities = tuple(sorted(communities, key=lambda c: [repr(v) for v in c]))
    return Partition(communities=communities, q=_q(adj, communities, resolution=1.0))
