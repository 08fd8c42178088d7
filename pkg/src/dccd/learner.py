"""Skeleton learners: the divided pipeline, its no-partition ablation, and PC-stable.

The per-block search is a two-phase strategy seeded by the scaffold subgraph:
a forward phase adds edges for marginally dependent untested pairs, and a
backward phase prunes edges that turn out conditionally independent, PC-stable
style (per-level adjacency snapshots, first independence wins).  Merging
unions the block results, order-0 tests the never-touched cross-block pairs,
and finishes with one backward pass over the full graph.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

from .citest import CICache, CIEngine, FisherZ
from .core import Dataset, Partition, Skeleton, canonical_edge
from .dependence import DependenceMeasure
from .partition import (
    PartitionConfig,
    Subgraph,
    causal_expansion,
    girvan_newman,
    induce_subgraph,
)
from .scaffold import build_super_structure

CORRECTION_STRATEGY = "order0-forward+full-backward"


@dataclass(frozen=True)
class LearnConfig:
    alpha: float = 0.05
    max_order: int | None = None  # None = limited only by adjacency sizes
    measure: DependenceMeasure = field(default_factory=DependenceMeasure)
    partition: PartitionConfig = field(default_factory=PartitionConfig)
    use_partition: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.max_order is not None and self.max_order < 0:
            raise ValueError("max_order must be >= 0")


@dataclass
class RunReport:
    """Provenance and cost record for one learner run."""

    p: int
    n: int
    seed: int
    alpha: float
    engine: str
    measure: str | None = None
    knn: int | None = None
    max_order: int | None = None
    partitioned: bool = False
    core_block_sizes: list[int] = field(default_factory=list)
    block_sizes: list[int] = field(default_factory=list)
    scaffold_edges: int = 0
    final_edges: int = 0
    unique_ci_tests: int = 0
    stage_ms: dict[str, float] = field(default_factory=dict)
    correction: str = CORRECTION_STRATEGY

    def to_dict(self) -> dict:
        return dict(self.__dict__)


class StageError(RuntimeError):
    """Wraps a failure with the pipeline stage it happened in."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


def forward_phase(g: Skeleton, scope: Iterable[int], cache: CICache, engine: CIEngine) -> Skeleton:
    """Marginally test every untested non-adjacent pair in scope; add dependent ones.

    Pairs whose order-0 query is already cached were adjudicated elsewhere and
    are left alone.  Pairs run in canonical (i, j) order.
    """
    vertices = sorted(set(int(v) for v in scope))
    edges = set(g.edges)
    for a in range(len(vertices)):
        for b in range(a + 1, len(vertices)):
            pair = (vertices[a], vertices[b])
            if pair in edges or cache.seen(*pair):
                continue
            result = cache.test(engine, *pair)
            if not result.independent:
                edges.add(pair)
    return Skeleton(g.p, frozenset(edges))


def backward_phase(
    g: Skeleton,
    cache: CICache,
    engine: CIEngine,
    max_order: int | None = None,
    sepsets: dict[tuple[int, int], tuple[int, ...]] | None = None,
) -> Skeleton:
    """Remove edges found conditionally independent, PC-stable style.

    At level L, adjacencies are frozen once; each surviving edge {i, j} is
    tested against every size-L subset of adj(i)\\{j} then adj(j)\\{i}
    (lexicographic order) and removed on the first independent verdict, with
    the separating set recorded in ``sepsets`` when a dict is supplied.
    Conditioning sets stay inside whatever variable set g's edges span.
    """
    edges = set(g.edges)
    level = 0
    while max_order is None or level <= max_order:
        adj: dict[int, set[int]] = {}
        for i, j in edges:
            adj.setdefault(i, set()).add(j)
            adj.setdefault(j, set()).add(i)
        any_qualified = False
        for i, j in sorted(edges):
            nbrs_i = sorted(adj[i] - {j})
            nbrs_j = sorted(adj[j] - {i})
            if len(nbrs_i) < level and len(nbrs_j) < level:
                continue
            any_qualified = True
            tried: set[tuple[int, ...]] = set()
            removed = False
            for side in (nbrs_i, nbrs_j):
                if len(side) < level:
                    continue
                for subset in combinations(side, level):
                    if subset in tried:
                        continue
                    tried.add(subset)
                    result = cache.test(engine, i, j, subset)
                    if result.independent:
                        edges.discard((i, j))
                        if sepsets is not None:
                            sepsets[(i, j)] = subset
                        removed = True
                        break
                if removed:
                    break
        if not any_qualified:
            break
        level += 1
    return Skeleton(g.p, frozenset(edges))


def _embed(sub: Subgraph, p: int) -> Skeleton:
    edges = frozenset(
        canonical_edge(sub.vertices[a], sub.vertices[b]) for a, b in sub.skeleton.edges
    )
    return Skeleton(p, edges)


def learn_subgraphs(
    dataset: Dataset,
    blocks: Partition,
    scaffold: Skeleton,
    cache: CICache,
    engine: CIEngine,
    max_order: int | None = None,
) -> list[Subgraph]:
    """Run the two-phase search inside each block, seeded by its scaffold subgraph.

    Every query stays inside the owning block; returned skeletons are in local
    indices with their local->global vertex maps.
    """
    results = []
    for block in blocks:
        seed_graph = _embed(induce_subgraph(scaffold, block), dataset.p)
        grown = forward_phase(seed_graph, block, cache, engine)
        pruned = backward_phase(grown, cache, engine, max_order)
        results.append(induce_subgraph(pruned, block))
    return results


def union_skeleton(locals_: Sequence[Subgraph], p: int) -> Skeleton:
    """An edge survives the union iff at least one containing block retained it."""
    edges: set[tuple[int, int]] = set()
    for sub in locals_:
        edges.update(_embed(sub, p).edges)
    return Skeleton(p, frozenset(edges))


def merge_and_correct(
    dataset: Dataset,
    locals_: Sequence[Subgraph],
    cache: CICache,
    engine: CIEngine,
    max_order: int | None = None,
    sepsets: dict[tuple[int, int], tuple[int, ...]] | None = None,
) -> Skeleton:
    """Union the block results, order-0 test never-touched pairs, prune globally.

    The forward pass only reaches pairs with no cached marginal verdict, which
    after block learning are exactly the cross-block pairs; the final backward
    pass sees full adjacencies and adjudicates any block-level disagreements.
    """
    merged = union_skeleton(locals_, dataset.p)
    corrected = forward_phase(merged, range(dataset.p), cache, engine)
    return backward_phase(corrected, cache, engine, max_order, sepsets)


def run_pipeline(dataset: Dataset, cfg: LearnConfig) -> tuple[Skeleton, RunReport]:
    """Scaffold -> divide -> per-block learn -> merge/correct.

    With ``cfg.use_partition`` false the divide step degenerates to a single
    all-variable block, giving the ablation variant.
    """
    report = RunReport(
        p=dataset.p,
        n=dataset.n,
        seed=cfg.seed,
        alpha=cfg.alpha,
        engine=FisherZ.tag,
        measure=cfg.measure.tag,
        knn=cfg.measure.k,
        max_order=cfg.max_order,
        partitioned=cfg.use_partition,
    )
    timer = time.perf_counter

    t0 = timer()
    try:
        scaffold = build_super_structure(dataset, cfg.measure)
    except Exception as exc:
        raise StageError("scaffold", exc) from exc
    report.scaffold_edges = scaffold.edge_count
    report.stage_ms["scaffold"] = (timer() - t0) * 1000.0

    t0 = timer()
    try:
        if cfg.use_partition:
            core = girvan_newman(scaffold, cfg.partition)
            blocks = causal_expansion(scaffold, core, cfg.partition.expansion_hops)
        else:
            core = Partition((tuple(range(dataset.p)),))
            blocks = core
    except Exception as exc:
        raise StageError("partition", exc) from exc
    report.core_block_sizes = core.block_sizes()
    report.block_sizes = blocks.block_sizes()
    report.stage_ms["partition"] = (timer() - t0) * 1000.0

    cache = CICache()
    try:
        engine = FisherZ(dataset, cfg.alpha)
    except Exception as exc:
        raise StageError("citest", exc) from exc

    t0 = timer()
    try:
        local_results = learn_subgraphs(dataset, blocks, scaffold, cache, engine, cfg.max_order)
    except Exception as exc:
        raise StageError("subgraphs", exc) from exc
    report.stage_ms["subgraphs"] = (timer() - t0) * 1000.0

    t0 = timer()
    try:
        final = merge_and_correct(dataset, local_results, cache, engine, cfg.max_order)
    except Exception as exc:
        raise StageError("merge", exc) from exc
    report.stage_ms["merge"] = (timer() - t0) * 1000.0

    report.final_edges = final.edge_count
    report.unique_ci_tests = cache.unique_count
    report.stage_ms["total"] = sum(report.stage_ms.values())
    return final, report


def pc_stable_skeleton(
    dataset: Dataset,
    cache: CICache,
    engine: CIEngine,
    max_order: int | None = None,
    sepsets: dict[tuple[int, int], tuple[int, ...]] | None = None,
) -> Skeleton:
    """Order-by-order elimination from the complete graph (stable variant)."""
    return backward_phase(Skeleton.complete(dataset.p), cache, engine, max_order, sepsets)


def run_pc_baseline(dataset: Dataset, cfg: LearnConfig) -> tuple[Skeleton, RunReport]:
    report = RunReport(
        p=dataset.p,
        n=dataset.n,
        seed=cfg.seed,
        alpha=cfg.alpha,
        engine=FisherZ.tag,
        max_order=cfg.max_order,
        correction="none",
    )
    cache = CICache()
    try:
        engine = FisherZ(dataset, cfg.alpha)
    except Exception as exc:
        raise StageError("citest", exc) from exc
    t0 = time.perf_counter()
    try:
        skeleton = pc_stable_skeleton(dataset, cache, engine, cfg.max_order)
    except Exception as exc:
        raise StageError("pc-stable", exc) from exc
    report.stage_ms["pc_stable"] = (time.perf_counter() - t0) * 1000.0
    report.stage_ms["total"] = report.stage_ms["pc_stable"]
    report.final_edges = skeleton.edge_count
    report.unique_ci_tests = cache.unique_count
    return skeleton, report
