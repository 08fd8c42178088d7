"""Shared domain types and file formats.

Variables are addressed by integer column index everywhere; names are
metadata carried by :class:`Dataset` only.  All types are immutable after
construction and safe to share across workers.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

NOISE_FAMILIES = ("gaussian", "exponential", "gamma", "uniform")


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Dataset:
    """An n x p matrix of continuous observations with column names."""

    names: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(str(s) for s in self.names))
        values = _readonly(self.values)
        object.__setattr__(self, "values", values)
        if values.ndim != 2:
            raise ValueError(f"values must be 2-d, got shape {values.shape}")
        n, p = values.shape
        if p < 2:
            raise ValueError(f"need at least 2 variables, got {p}")
        if n < 1:
            raise ValueError("need at least 1 sample")
        if len(self.names) != p:
            raise ValueError(f"{len(self.names)} names for {p} columns")
        if len(set(self.names)) != p:
            raise ValueError("duplicate variable names")
        if not np.all(np.isfinite(values)):
            raise ValueError("non-finite values in dataset")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def column(self, i: int) -> np.ndarray:
        return self.values[:, i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.names == other.names and np.array_equal(self.values, other.values)


def canonical_edge(i: int, j: int) -> tuple[int, int]:
    if i == j:
        raise ValueError(f"self-loop at vertex {i}")
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class Skeleton:
    """Undirected simple graph over p variables, edges stored as (i, j) with i < j."""

    p: int
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be >= 1")
        canon = set()
        for e in self.edges:
            i, j = canonical_edge(*e)
            if not (0 <= i < self.p and 0 <= j < self.p):
                raise ValueError(f"edge ({i},{j}) out of range for p={self.p}")
            canon.add((i, j))
        object.__setattr__(self, "edges", frozenset(canon))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def has_edge(self, i: int, j: int) -> bool:
        return canonical_edge(i, j) in self.edges

    def neighbors(self, i: int) -> set[int]:
        return {b if a == i else a for a, b in self.edges if i in (a, b)}

    def adjacency(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in range(self.p)]
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return adj

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    @staticmethod
    def complete(p: int) -> "Skeleton":
        return Skeleton(p, frozenset((i, j) for i in range(p) for j in range(i + 1, p)))


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Complete weighted graph given by a symmetric nonnegative matrix, zero diagonal."""

    weights: np.ndarray

    def __post_init__(self):
        w = _readonly(self.weights)
        object.__setattr__(self, "weights", w)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"weights must be square, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("non-finite weights")
        if np.any(w < 0):
            raise ValueError("negative weights")
        if not np.array_equal(w, w.T):
            raise ValueError("weights must be symmetric")
        if np.any(np.diag(w) != 0):
            raise ValueError("diagonal must be zero")

    @property
    def p(self) -> int:
        return self.weights.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return np.array_equal(self.weights, other.weights)


@dataclass(frozen=True)
class Partition:
    """Ordered list of variable-index blocks; blocks may overlap after expansion."""

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(sorted(set(int(v) for v in b))) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        for b in blocks:
            if not b:
                raise ValueError("empty block")
            if b[0] < 0:
                raise ValueError(f"negative vertex {b[0]}")

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def vertices(self) -> set[int]:
        out: set[int] = set()
        for b in self.blocks:
            out.update(b)
        return out

    def covers(self, p: int) -> bool:
        return self.vertices() == set(range(p))

    def is_disjoint(self) -> bool:
        seen: set[int] = set()
        for b in self.blocks:
            if seen.intersection(b):
                return False
            seen.update(b)
        return True

    def block_sizes(self) -> list[int]:
        return [len(b) for b in self.blocks]


@dataclass(frozen=True)
class NoiseSpec:
    """Additive noise family for one structural equation.

    ``scale`` is the standard deviation for the gaussian family and a plain
    multiplier for the mean-centered exponential(1), gamma(2, 1) and
    uniform[-1, 1] families.
    """

    family: str = "gaussian"
    scale: float = 1.0

    def __post_init__(self):
        if self.family not in NOISE_FAMILIES:
            raise ValueError(f"unknown noise family {self.family!r}")
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise ValueError(f"noise scale must be positive, got {self.scale}")


@dataclass(frozen=True, eq=False)
class GaussianSEM:
    """Linear structural-equation model.

    ``weights[i, j]`` is the coefficient of parent i in child j's equation;
    the nonzero pattern must be acyclic.
    """

    weights: np.ndarray
    noises: tuple[NoiseSpec, ...]
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        w = _readonly(self.weights)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "noises", tuple(self.noises))
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"weight matrix must be square, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("non-finite coefficients")
        p = w.shape[0]
        if len(self.noises) != p:
            raise ValueError(f"{len(self.noises)} noise specs for {p} variables")
        if self.names is not None:
            names = tuple(str(s) for s in self.names)
            object.__setattr__(self, "names", names)
            if len(names) != p or len(set(names)) != p:
                raise ValueError("names must be unique and one per variable")
        self.topological_order()  # raises on cycles

    @property
    def p(self) -> int:
        return self.weights.shape[0]

    @property
    def arc_count(self) -> int:
        return int(np.count_nonzero(self.weights))

    def parents(self, j: int) -> np.ndarray:
        return np.nonzero(self.weights[:, j])[0]

    def topological_order(self) -> list[int]:
        """Kahn's algorithm, smallest index first; raises on a cyclic pattern."""
        p = self.weights.shape[0]
        pattern = self.weights != 0
        indeg = pattern.sum(axis=0).astype(int)
        frontier = sorted(np.nonzero(indeg == 0)[0].tolist())
        order: list[int] = []
        while frontier:
            v = frontier.pop(0)
            order.append(v)
            children = np.nonzero(pattern[v])[0]
            for c in children:
                indeg[c] -= 1
                if indeg[c] == 0:
                    frontier.append(int(c))
            frontier.sort()
        if len(order) != p:
            raise ValueError("weight pattern contains a cycle")
        return order

    def skeleton(self) -> Skeleton:
        edges = {canonical_edge(int(a), int(b)) for a, b in zip(*np.nonzero(self.weights))}
        return Skeleton(self.p, frozenset(edges))


# ---------------------------------------------------------------------------
# File formats: CSV datasets, JSON skeletons, JSON partitions.
# ---------------------------------------------------------------------------


def save_dataset(dataset: Dataset, path) -> None:
    """Write a dataset as header + rows CSV; floats keep full round-trip precision."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(dataset.names)
        for row in dataset.values:
            writer.writerow([repr(float(v)) for v in row])


def load_dataset(path) -> Dataset:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        names = [s.strip() for s in header]
        if len(set(names)) != len(names):
            raise ValueError(f"{path}: duplicate header names")
        p = len(names)
        rows: list[list[float]] = []
        for rownum, cells in enumerate(reader, start=1):
            if len(cells) != p:
                raise ValueError(f"{path}: row {rownum} has {len(cells)} cells, expected {p}")
            parsed = []
            for col, cell in enumerate(cells):
                try:
                    v = float(cell)
                except ValueError:
                    raise ValueError(
                        f"{path}: row {rownum}, column {names[col]}: not a number: {cell!r}"
                    ) from None
                if not math.isfinite(v):
                    raise ValueError(f"{path}: row {rownum}, column {names[col]}: non-finite value")
                parsed.append(v)
            rows.append(parsed)
        if not rows:
            raise ValueError(f"{path}: no data rows")
    return Dataset(tuple(names), np.array(rows, dtype=float))


def serialize_skeleton(g: Skeleton) -> str:
    return json.dumps({"p": g.p, "edges": [list(e) for e in g.sorted_edges()]})


def parse_skeleton(text: str) -> Skeleton:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed skeleton JSON: {exc}") from None
    if not isinstance(doc, dict) or "p" not in doc or "edges" not in doc:
        raise ValueError("skeleton JSON must have fields 'p' and 'edges'")
    p = int(doc["p"])
    seen: set[tuple[int, int]] = set()
    for e in doc["edges"]:
        if len(e) != 2:
            raise ValueError(f"malformed edge {e!r}")
        i, j = int(e[0]), int(e[1])
        if i == j:
            raise ValueError(f"self-loop at vertex {i}")
        if not (0 <= i < p and 0 <= j < p):
            raise ValueError(f"edge ({i},{j}) out of range for p={p}")
        key = canonical_edge(i, j)
        if key in seen:
            raise ValueError(f"duplicate edge ({i},{j})")
        seen.add(key)
    return Skeleton(p, frozenset(seen))


def save_skeleton(g: Skeleton, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_skeleton(g))
        fh.write("\n")


def load_skeleton(path) -> Skeleton:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_skeleton(fh.read())


def save_partition(part: Partition, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"blocks": [list(b) for b in part.blocks]}, fh)
        fh.write("\n")


def load_partition(path) -> Partition:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or "blocks" not in doc:
        raise ValueError("partition JSON must have field 'blocks'")
    return Partition(tuple(tuple(b) for b in doc["blocks"]))
