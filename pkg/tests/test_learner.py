import numpy as np
import pytest

from dccd.citest import CICache, FisherZ, canonical_query
from dccd.core import Dataset, Partition, Skeleton
from dccd.datagen import GenConfig, generate_dag, sample_sem
from dccd.dependence import DependenceMeasure
from dccd.learner import (
    LearnConfig,
    StageError,
    backward_phase,
    forward_phase,
    learn_subgraphs,
    merge_and_correct,
    pc_stable_skeleton,
    run_pc_baseline,
    run_pipeline,
    union_skeleton,
)
from dccd.partition import PartitionConfig

from oracles import dsep_skeleton, parent_sets_of

PEARSON = DependenceMeasure("pearson")


def chain_data(n, seed, coef=0.7, p=3):
    rng = np.random.default_rng(seed)
    cols = [rng.standard_normal(n)]
    for _ in range(p - 1):
        cols.append(coef * cols[-1] + rng.standard_normal(n))
    return Dataset(tuple(f"v{i}" for i in range(p)), np.column_stack(cols))


def collider_data(n, seed, coef=0.7):
    rng = np.random.default_rng(seed)
    x0 = rng.standard_normal(n)
    x1 = rng.standard_normal(n)
    x2 = coef * x0 + coef * x1 + rng.standard_normal(n)
    return Dataset(("a", "b", "c"), np.column_stack([x0, x1, x2]))


def fresh(dataset, alpha=0.05):
    return CICache(), FisherZ(dataset, alpha)


class TestForwardPhase:
    def test_complete_graph_untouched(self):
        ds = chain_data(500, 0)
        cache, engine = fresh(ds)
        out = forward_phase(Skeleton.complete(3), range(3), cache, engine)
        assert out == Skeleton.complete(3)
        assert cache.unique_count == 0

    def test_strong_pair_added(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal(500)
        ds = Dataset(("a", "b"), np.column_stack([x, x + 0.01 * rng.standard_normal(500)]))
        cache, engine = fresh(ds)
        out = forward_phase(Skeleton(2), range(2), cache, engine)
        assert out.edges == frozenset({(0, 1)})

    def test_null_false_edge_rate(self):
        # under independence each pair is a size-alpha test: mean added ~ 3*alpha
        added = []
        for seed in range(100):
            rng = np.random.default_rng(2000 + seed)
            ds = Dataset(("a", "b", "c"), rng.standard_normal((5000, 3)))
            cache, engine = fresh(ds)
            out = forward_phase(Skeleton(3), range(3), cache, engine)
            added.append(out.edge_count)
        mean = np.mean(added)
        sigma = np.sqrt(3 * 0.05 * 0.95 / 100)
        assert abs(mean - 0.15) < 3 * sigma

    def test_skips_cached_pairs(self):
        ds = chain_data(500, 3)
        cache, engine = fresh(ds)
        cache.test(engine, 0, 1)
        out = forward_phase(Skeleton(3), range(3), cache, engine)
        # (0,1) already adjudicated elsewhere: not re-added here
        assert (0, 1) not in out.edges
        assert cache.unique_count == 3


class TestBackwardPhase:
    def test_chain_triangle_pruned(self):
        wins = 0
        for seed in range(100):
            ds = chain_data(5000, 3000 + seed)
            cache, engine = fresh(ds)
            sepsets = {}
            out = backward_phase(Skeleton.complete(3), cache, engine, sepsets=sepsets)
            if out.edges == frozenset({(0, 1), (1, 2)}) and sepsets.get((0, 2)) == (1,):
                wins += 1
        assert wins >= 90

    def test_edgeless_noop(self):
        ds = chain_data(200, 4)
        cache, engine = fresh(ds)
        out = backward_phase(Skeleton(3), cache, engine)
        assert out.edge_count == 0
        assert cache.unique_count == 0

    def test_collider_removed_at_order_zero(self):
        # marginal independence kills {0,1} before any conditioning on the collider
        wins = 0
        for seed in range(100):
            ds = collider_data(5000, 4000 + seed)
            cache, engine = fresh(ds)
            sepsets = {}
            out = backward_phase(Skeleton.complete(3), cache, engine, sepsets=sepsets)
            if out.edges == frozenset({(0, 2), (1, 2)}) and sepsets.get((0, 1)) == ():
                wins += 1
        assert wins >= 90

    def test_max_order_cap(self):
        ds = chain_data(5000, 5)
        cache, engine = fresh(ds)
        out = backward_phase(Skeleton.complete(3), cache, engine, max_order=0)
        # the mediated pair is marginally dependent, so order 0 cannot prune it
        assert (0, 2) in out.edges


class TestLearnSubgraphs:
    def test_single_block_equals_whole_graph_search(self):
        ds = chain_data(3000, 6, p=5)
        scaffold = Skeleton(5, frozenset((i, i + 1) for i in range(4)))
        blocks = Partition((tuple(range(5)),))

        cache_a, engine_a = fresh(ds)
        subs = learn_subgraphs(ds, blocks, scaffold, cache_a, engine_a)
        assert len(subs) == 1 and subs[0].vertices == tuple(range(5))

        cache_b, engine_b = fresh(ds)
        grown = forward_phase(scaffold, range(5), cache_b, engine_b)
        pruned = backward_phase(grown, cache_b, engine_b)
        assert subs[0].skeleton == pruned
        assert cache_a.unique_count == cache_b.unique_count

    def test_disjoint_chains_block_scoped(self):
        rng = np.random.default_rng(7)
        a0 = rng.standard_normal(5000)
        a1 = 0.7 * a0 + rng.standard_normal(5000)
        b0 = rng.standard_normal(5000)
        b1 = 0.7 * b0 + rng.standard_normal(5000)
        ds = Dataset(("a0", "a1", "b0", "b1"), np.column_stack([a0, a1, b0, b1]))
        scaffold = Skeleton(4, frozenset({(0, 1), (2, 3)}))
        blocks = Partition(((0, 1), (2, 3)))
        cache, engine = fresh(ds)
        subs = learn_subgraphs(ds, blocks, scaffold, cache, engine)
        assert subs[0].skeleton.edges == frozenset({(0, 1)})
        assert subs[1].skeleton.edges == frozenset({(0, 1)})  # local indices
        block_sets = [set(b) for b in blocks]
        for i, j, s in cache.log:
            assert any({i, j, *s} <= b for b in block_sets), "query escaped its block"

    def test_vertex_sets_match_blocks(self):
        sem, truth = generate_dag(GenConfig(p=20, seed=8))
        ds = sample_sem(sem, 1000, seed=9)
        scaffold = Skeleton(20, frozenset((i, i + 1) for i in range(19)))
        blocks = Partition((tuple(range(12)), tuple(range(8, 20))))
        cache, engine = fresh(ds)
        subs = learn_subgraphs(ds, blocks, scaffold, cache, engine)
        for sub, block in zip(subs, blocks):
            assert sub.vertices == block


class TestMergeAndCorrect:
    def test_single_block_identity(self):
        ds = chain_data(5000, 10, p=4)
        scaffold = Skeleton(4, frozenset((i, i + 1) for i in range(3)))
        blocks = Partition((tuple(range(4)),))
        cache, engine = fresh(ds)
        subs = learn_subgraphs(ds, blocks, scaffold, cache, engine)
        count_after_blocks = cache.unique_count
        merged = merge_and_correct(ds, subs, cache, engine)
        assert merged == union_skeleton(subs, 4)
        assert cache.unique_count == count_after_blocks

    def test_union_rule_recount_oracle(self):
        # the union keeps an edge iff some containing block retained it
        rng = np.random.default_rng(30)
        from dccd.partition import Subgraph, induce_subgraph

        for _ in range(50):
            p = int(rng.integers(4, 12))
            pairs = [(i, j) for i in range(p) for j in range(i + 1, p)]
            blocks = []
            subs = []
            for _ in range(int(rng.integers(1, 4))):
                size = int(rng.integers(2, p + 1))
                block = tuple(sorted(int(v) for v in rng.choice(p, size, replace=False)))
                members = set(block)
                kept = frozenset(
                    e for e in pairs
                    if e[0] in members and e[1] in members and rng.random() < 0.4
                )
                blocks.append(block)
                subs.append(induce_subgraph(Skeleton(p, kept), block))
            union = union_skeleton(subs, p)
            expected = set()
            for block, sub in zip(blocks, subs):
                for a, b in sub.skeleton.edges:
                    expected.add((block[a], block[b]))
            assert union.edges == frozenset(expected)

    def test_overlap_edges_appear_once(self):
        ds = chain_data(5000, 11, p=4)
        scaffold = Skeleton(4, frozenset((i, i + 1) for i in range(3)))
        blocks = Partition(((0, 1, 2), (1, 2, 3)))
        cache, engine = fresh(ds)
        subs = learn_subgraphs(ds, blocks, scaffold, cache, engine)
        union = union_skeleton(subs, 4)
        assert len(union.edges) == len(set(union.edges))
        assert (1, 2) in union.edges

    def test_cross_block_edge_recovered(self):
        # truth 0-1, 1-2 crossing the cut, 2-3; scaffold misses the cross edge
        wins = 0
        for seed in range(100):
            rng = np.random.default_rng(5000 + seed)
            x0 = rng.standard_normal(5000)
            x1 = 0.7 * x0 + rng.standard_normal(5000)
            x2 = 0.7 * x1 + rng.standard_normal(5000)
            x3 = 0.7 * x2 + rng.standard_normal(5000)
            ds = Dataset(("a", "b", "c", "d"), np.column_stack([x0, x1, x2, x3]))
            scaffold = Skeleton(4, frozenset({(0, 1), (2, 3)}))
            blocks = Partition(((0, 1), (2, 3)))
            cache, engine = fresh(ds)
            subs = learn_subgraphs(ds, blocks, scaffold, cache, engine)
            merged = merge_and_correct(ds, subs, cache, engine)
            if (1, 2) in merged.edges:
                wins += 1
        assert wins >= 90


class TestRunPipeline:
    def test_two_variable_pair(self):
        rng = np.random.default_rng(12)
        x = rng.standard_normal(2000)
        ds = Dataset(("a", "b"), np.column_stack([x, 0.8 * x + rng.standard_normal(2000)]))
        skeleton, report = run_pipeline(ds, LearnConfig(measure=PEARSON))
        assert skeleton.edges == frozenset({(0, 1)})
        assert report.unique_ci_tests >= 1
        assert report.scaffold_edges == 1

    def test_ablation_toggle(self):
        sem, _ = generate_dag(GenConfig(p=24, seed=13))
        ds = sample_sem(sem, 1500, seed=14)
        cfg_on = LearnConfig(measure=PEARSON, use_partition=True)
        cfg_off = LearnConfig(measure=PEARSON, use_partition=False)
        _, rep_on = run_pipeline(ds, cfg_on)
        _, rep_off = run_pipeline(ds, cfg_off)
        assert rep_off.block_sizes == [24]
        assert len(rep_on.block_sizes) >= 2
        assert rep_on.partitioned and not rep_off.partitioned

    def test_deterministic(self):
        sem, _ = generate_dag(GenConfig(p=15, seed=15))
        ds = sample_sem(sem, 1200, seed=16)
        cfg = LearnConfig(measure=PEARSON)
        skel_a, rep_a = run_pipeline(ds, cfg)
        skel_b, rep_b = run_pipeline(ds, cfg)
        assert skel_a == skel_b
        assert rep_a.unique_ci_tests == rep_b.unique_ci_tests

    def test_frugality_bound(self):
        # divided run spends at most the ablation count plus all order-0 cross pairs
        sem, _ = generate_dag(GenConfig(p=18, seed=17))
        ds = sample_sem(sem, 1500, seed=18)
        _, rep_on = run_pipeline(ds, LearnConfig(measure=PEARSON, use_partition=True))
        _, rep_off = run_pipeline(ds, LearnConfig(measure=PEARSON, use_partition=False))
        assert rep_on.unique_ci_tests <= rep_off.unique_ci_tests + 18 * 17 // 2

    def test_stage_error_names_stage(self):
        values = np.column_stack([np.ones(100), np.arange(100, dtype=float)])
        ds = Dataset(("const", "ramp"), values)
        with pytest.raises(StageError, match=r"\[scaffold\]"):
            run_pipeline(ds, LearnConfig(measure=PEARSON))

    def test_report_stages_recorded(self):
        ds = chain_data(1000, 19, p=6)
        _, report = run_pipeline(ds, LearnConfig(measure=PEARSON))
        for stage in ("scaffold", "partition", "subgraphs", "merge", "total"):
            assert stage in report.stage_ms


class TestPcStable:
    def test_independent_triple(self):
        rng = np.random.default_rng(20)
        ds = Dataset(("a", "b", "c"), rng.standard_normal((5000, 3)))
        cache, engine = fresh(ds)
        skeleton = pc_stable_skeleton(ds, cache, engine)
        assert skeleton.edge_count == 0
        assert cache.unique_count == 3

    def test_chain_recovery(self):
        wins = 0
        for seed in range(100):
            ds = chain_data(5000, 6000 + seed)
            cache, engine = fresh(ds)
            skeleton = pc_stable_skeleton(ds, cache, engine)
            wins += skeleton.edges == frozenset({(0, 1), (1, 2)})
        assert wins >= 90

    def test_matches_d_separation_oracle(self):
        # alpha tightened so the ~10 pair-level tests rarely produce a false edge
        hits = 0
        for seed in range(50):
            sem, _ = generate_dag(GenConfig(p=5, edge_prob=0.3, seed=700 + seed))
            truth = dsep_skeleton(parent_sets_of(sem.weights), 5)
            ds = sample_sem(sem, 20000, seed=800 + seed)
            cache, engine = fresh(ds, alpha=0.01)
            skeleton = pc_stable_skeleton(ds, cache, engine)
            hits += skeleton.edges == truth
        assert hits >= 40

    def test_order_invariance_under_relabeling(self):
        sem, _ = generate_dag(GenConfig(p=8, edge_prob=0.3, seed=21))
        ds = sample_sem(sem, 4000, seed=22)
        cache, engine = fresh(ds)
        base = pc_stable_skeleton(ds, cache, engine)

        perm = np.random.default_rng(23).permutation(8)
        shuffled = Dataset(
            tuple(ds.names[k] for k in perm), ds.values[:, perm]
        )
        cache2, engine2 = fresh(shuffled)
        learned = pc_stable_skeleton(shuffled, cache2, engine2)
        # map back: column k of shuffled is original perm[k]
        unpermuted = frozenset(
            canonical_query(int(perm[i]), int(perm[j]))[:2] for i, j in learned.edges
        )
        assert unpermuted == base.edges

    def test_baseline_report(self):
        ds = chain_data(2000, 24)
        skeleton, report = run_pc_baseline(ds, LearnConfig())
        assert report.engine == "fisher-z"
        assert report.unique_ci_tests > 0
        assert report.final_edges == skeleton.edge_count
