"""Divide-and-conquer causal skeleton discovery.

Pipeline: a tree-structured super-structure built from pairwise dependence
(no CI tests), Girvan-Newman partitioning with 1-hop causal expansion,
per-block two-phase skeleton search through a shared CI cache, and a
merge/correction pass.  Ships with a linear-SEM data generator, a PC-stable
baseline, skeleton metrics, and an experiment bench.
"""

from .citest import CICache, CIResult, FisherZ, canonical_query, fisher_z, test_cached
from .core import (
    Dataset,
    GaussianSEM,
    NoiseSpec,
    Partition,
    Skeleton,
    WeightedGraph,
    load_dataset,
    load_partition,
    load_skeleton,
    parse_skeleton,
    save_dataset,
    save_partition,
    save_skeleton,
    serialize_skeleton,
)
from .datagen import (
    GenConfig,
    default_edge_prob,
    generate_dag,
    load_gaussian_network,
    sample_sem,
    save_gaussian_network,
)
from .dependence import (
    DependenceMeasure,
    copula_entropy,
    dependency_matrix,
    empirical_copula,
    mutual_information,
    pearson,
    spearman,
)
from .experiments import ExperimentSpec, load_spec, run_bench, spec_from_dict
from .learner import (
    LearnConfig,
    RunReport,
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
from .metrics import SkeletonScore, aggregate_scores, score_skeleton
from .partition import (
    PartitionConfig,
    Subgraph,
    causal_expansion,
    edge_betweenness,
    girvan_newman,
    induce_subgraph,
    uncovered_edges,
)
from .scaffold import build_super_structure, max_spanning_tree

__version__ = "0.1.0"
