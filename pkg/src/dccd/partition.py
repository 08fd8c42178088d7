"""Divide the super-structure into overlapping blocks.

Girvan-Newman community detection (iterative removal of the highest
edge-betweenness edge) splits the scaffold into components; each block is then
expanded by its 1-hop neighborhood in the original scaffold so every scaffold
edge becomes interior to at least one block.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

from .core import Partition, Skeleton, canonical_edge


@dataclass(frozen=True)
class PartitionConfig:
    """Stopping criteria for the divide step.

    ``max_block_size=None`` resolves to max(8, ceil(p/2)) at run time, which
    yields two to four blocks at the desk-scale graph sizes used here.
    """

    max_block_size: int | None = None
    min_blocks: int = 1
    expansion_hops: int = 1

    def __post_init__(self):
        if self.max_block_size is not None and self.max_block_size < 2:
            raise ValueError("max_block_size must be >= 2")
        if self.min_blocks < 1:
            raise ValueError("min_blocks must be >= 1")
        if self.expansion_hops < 0:
            raise ValueError("expansion_hops must be >= 0")

    def resolved_max_block_size(self, p: int) -> int:
        if self.max_block_size is not None:
            return self.max_block_size
        return max(8, math.ceil(p / 2))


def _components(p: int, adj: list[set[int]]) -> list[list[int]]:
    seen = [False] * p
    comps: list[list[int]] = []
    for start in range(p):
        if seen[start]:
            continue
        comp = []
        queue = deque([start])
        seen[start] = True
        while queue:
            v = queue.popleft()
            comp.append(v)
            for w in sorted(adj[v]):
                if not seen[w]:
                    seen[w] = True
                    queue.append(w)
        comps.append(sorted(comp))
    return comps


def edge_betweenness(p: int, edges: set[tuple[int, int]]) -> dict[tuple[int, int], float]:
    """Exact edge betweenness (Brandes accumulation over all-pairs shortest paths).

    Each unordered vertex pair contributes once; unreachable pairs contribute
    nothing.  Deterministic: vertices and adjacencies are walked in index order.
    """
    adj: list[list[int]] = [[] for _ in range(p)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    for lst in adj:
        lst.sort()

    score = {canonical_edge(i, j): 0.0 for i, j in edges}
    for s in range(p):
        # BFS from s: sigma counts shortest paths, preds the BFS dag
        dist = [-1] * p
        sigma = [0.0] * p
        preds: list[list[int]] = [[] for _ in range(p)]
        dist[s] = 0
        sigma[s] = 1.0
        order: list[int] = []
        queue = deque([s])
        while queue:
            v = queue.popleft()
            order.append(v)
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = [0.0] * p
        for w in reversed(order):
            for v in preds[w]:
                contrib = sigma[v] / sigma[w] * (1.0 + delta[w])
                score[canonical_edge(v, w)] += contrib
                delta[v] += contrib
    # every source-sink pair was counted from both endpoints
    return {e: b / 2.0 for e, b in score.items()}


def girvan_newman(g: Skeleton, cfg: PartitionConfig) -> Partition:
    """Remove highest-betweenness edges until every component fits the config.

    Ties are broken by lexicographic edge order; betweenness is recomputed
    exactly after every removal.  Blocks come back disjoint, each sorted,
    ordered by smallest member.
    """
    max_size = cfg.resolved_max_block_size(g.p)
    edges = set(g.edges)
    while True:
        adj: list[set[int]] = [set() for _ in range(g.p)]
        for i, j in edges:
            adj[i].add(j)
            adj[j].add(i)
        comps = _components(g.p, adj)
        if len(comps) >= cfg.min_blocks and all(len(c) <= max_size for c in comps):
            break
        if not edges:
            break  # all singletons; nothing left to cut
        bet = edge_betweenness(g.p, edges)
        target = min(bet, key=lambda e: (-bet[e], e))
        edges.discard(target)
    return Partition(tuple(tuple(c) for c in comps))


def causal_expansion(g: Skeleton, part: Partition, hops: int = 1) -> Partition:
    """Grow each block by its neighborhood in the original scaffold.

    With the default single hop, every edge of g ends up interior to at least
    one expanded block; the input blocks must be a disjoint cover of g.
    """
    if not part.is_disjoint():
        raise ValueError("blocks must be disjoint before expansion")
    if not part.covers(g.p):
        raise ValueError("blocks must cover all vertices")
    adj = g.adjacency()
    expanded = []
    for block in part:
        grown = set(block)
        for _ in range(hops):
            boundary: set[int] = set()
            for v in grown:
                boundary.update(adj[v])
            grown |= boundary
        expanded.append(tuple(sorted(grown)))
    return Partition(tuple(expanded))


@dataclass(frozen=True)
class Subgraph:
    """A block-induced skeleton in local indices plus the local->global map."""

    skeleton: Skeleton
    vertices: tuple[int, ...]


def induce_subgraph(g: Skeleton, block) -> Subgraph:
    vertices = tuple(sorted(set(int(v) for v in block)))
    for v in vertices:
        if not (0 <= v < g.p):
            raise ValueError(f"vertex {v} out of range for p={g.p}")
    local = {v: k for k, v in enumerate(vertices)}
    members = set(vertices)
    edges = frozenset(
        (local[i], local[j]) for i, j in g.edges if i in members and j in members
    )
    return Subgraph(Skeleton(len(vertices), edges), vertices)


def uncovered_edges(g: Skeleton, part: Partition) -> int:
    """Count edges of g with no block containing both endpoints.

    Useful as a diagnostic on how much structure a partition severs; run it
    against the true skeleton to see how many cross-block true edges the
    divide step left for the correction pass.
    """
    blocks = [set(b) for b in part]
    count = 0
    for i, j in g.edges:
        if not any(i in b and j in b for b in blocks):
            count += 1
    return count
