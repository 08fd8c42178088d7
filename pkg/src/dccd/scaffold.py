"""Super-structure construction: maximum spanning tree of the dependency matrix.

This is the Chow-Liu construction with a pluggable dependence measure.  The
scaffold is deliberately sparse (always a tree) and is built without a single
conditional-independence test.
"""

from __future__ import annotations

from .core import Dataset, Skeleton, WeightedGraph
from .dependence import DependenceMeasure, dependency_matrix


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, v: int) -> int:
        root = v
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[v] != root:
            self.parent[v], v = root, self.parent[v]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


def max_spanning_tree(graph: WeightedGraph) -> Skeleton:
    """Kruskal's algorithm on edges sorted by (descending weight, ascending (i, j)).

    The lexicographic tie-break makes the tree deterministic; zero-weight edges
    are admissible, so the result always spans all p vertices with p-1 edges.
    """
    p = graph.p
    if p < 2:
        raise ValueError("need at least 2 vertices")
    w = graph.weights
    edges = sorted(
        ((i, j) for i in range(p) for j in range(i + 1, p)),
        key=lambda e: (-w[e[0], e[1]], e[0], e[1]),
    )
    uf = UnionFind(p)
    chosen: set[tuple[int, int]] = set()
    for i, j in edges:
        if uf.union(i, j):
            chosen.add((i, j))
            if len(chosen) == p - 1:
                break
    return Skeleton(p, frozenset(chosen))


def build_super_structure(dataset: Dataset, measure: DependenceMeasure) -> Skeleton:
    """Dependency matrix followed by its maximum spanning tree; no CI tests run."""
    return max_spanning_tree(dependency_matrix(dataset, measure))
