"""Command-line driver: every pipeline stage individually plus the bench grids."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

from .core import (
    load_dataset,
    load_skeleton,
    save_dataset,
    save_partition,
    save_skeleton,
)
from .datagen import GenConfig, NoiseSpec, generate_dag, load_gaussian_network, sample_sem, save_gaussian_network
from .dependence import DependenceMeasure
from .experiments import load_spec, run_bench
from .learner import LearnConfig, StageError, run_pc_baseline, run_pipeline
from .metrics import aggregate_scores, score_skeleton
from .partition import PartitionConfig, causal_expansion, girvan_newman
from .report import render_results
from .scaffold import build_super_structure


def _add_measure_args(parser):
    parser.add_argument("--measure", default="ce", choices=["ce", "mi", "pearson", "spearman"])
    parser.add_argument("--knn", type=int, default=3, help="k for the nearest-neighbor estimators")


def _add_engine_args(parser):
    parser.add_argument("--alpha", type=float, default=0.05)
    parser.add_argument("--max-order", type=int, default=None, help="cap on conditioning-set size")


def cmd_gen(args) -> int:
    if args.network:
        sem = load_gaussian_network(args.network)
        print(f"loaded network: {sem.p} nodes, {sem.arc_count} arcs")
    else:
        if args.p is None:
            raise ValueError("either --p or --network is required")
        cfg = GenConfig(
            p=args.p,
            n=args.n,
            edge_prob=args.edge_prob,
            weight_range=(args.weight_low, args.weight_high),
            noise=NoiseSpec(args.noise),
            seed=args.seed,
        )
        sem, _ = generate_dag(cfg)
    dataset = sample_sem(sem, args.n, args.seed)
    save_dataset(dataset, args.out_data)
    if args.out_truth:
        save_skeleton(sem.skeleton(), args.out_truth)
    if args.out_sem:
        save_gaussian_network(sem, args.out_sem)
    print(f"wrote {args.out_data} ({dataset.n}x{dataset.p})")
    return 0


def cmd_scaffold(args) -> int:
    dataset = load_dataset(args.data)
    skeleton = build_super_structure(dataset, DependenceMeasure(args.measure, args.knn))
    save_skeleton(skeleton, args.out)
    print(f"wrote {args.out} ({skeleton.edge_count} edges)")
    return 0


def cmd_partition(args) -> int:
    scaffold = load_skeleton(args.scaffold)
    cfg = PartitionConfig(args.max_block_size, args.min_blocks)
    blocks = girvan_newman(scaffold, cfg)
    if args.expand:
        blocks = causal_expansion(scaffold, blocks, cfg.expansion_hops)
    save_partition(blocks, args.out)
    print(f"wrote {args.out} ({len(blocks)} blocks, sizes {blocks.block_sizes()})")
    return 0


def cmd_learn(args) -> int:
    dataset = load_dataset(args.data)
    cfg = LearnConfig(
        alpha=args.alpha,
        max_order=args.max_order,
        measure=DependenceMeasure(args.measure, args.knn),
        partition=PartitionConfig(args.max_block_size, args.min_blocks),
        use_partition=not args.no_partition,
        seed=args.seed,
    )
    skeleton, report = run_pipeline(dataset, cfg)
    save_skeleton(skeleton, args.out)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=1)
            fh.write("\n")
    print(f"wrote {args.out} ({skeleton.edge_count} edges, {report.unique_ci_tests} unique CI tests)")
    return 0


def cmd_baseline_pc(args) -> int:
    dataset = load_dataset(args.data)
    cfg = LearnConfig(alpha=args.alpha, max_order=args.max_order, seed=args.seed)
    skeleton, report = run_pc_baseline(dataset, cfg)
    save_skeleton(skeleton, args.out)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=1)
            fh.write("\n")
    print(f"wrote {args.out} ({skeleton.edge_count} edges, {report.unique_ci_tests} unique CI tests)")
    return 0


def cmd_eval(args) -> int:
    truth = load_skeleton(args.truth)
    ci_counts = list(args.ci_tests or [])
    if ci_counts and len(ci_counts) != len(args.pred):
        raise ValueError("--ci-tests needs one value per --pred file")
    scores = []
    for idx, pred_path in enumerate(args.pred):
        pred = load_skeleton(pred_path)
        ci = ci_counts[idx] if ci_counts else 0
        scores.append((pred_path, score_skeleton(pred, truth, ci)))

    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(["label", "precision", "recall", "accuracy", "f1", "shd", "ci_tests"])
        for label, s in scores:
            writer.writerow([label, repr(s.precision), repr(s.recall), repr(s.accuracy),
                             repr(s.f1), s.shd, s.ci_tests])
        agg = aggregate_scores([s for _, s in scores])
        writer.writerow(
            ["mean"]
            + [repr(agg[m][0]) for m in ("precision", "recall", "accuracy", "f1")]
            + [repr(agg["shd"][0]), repr(agg["ci_tests"][0])]
        )
    finally:
        if args.out:
            out.close()
    return 0


def cmd_bench(args) -> int:
    spec = load_spec(args.spec)
    out_dir = args.out_dir or os.environ.get("DCCD_OUT_DIR", "bench-out")
    paths = run_bench(spec, out_dir, threads=args.threads)
    for name, path in paths.items():
        print(f"wrote {path}")
    if args.figures:
        for fig in render_results(paths["results"], os.path.join(out_dir, "figures")):
            print(f"wrote {fig}")
    return 0


def cmd_report(args) -> int:
    out_dir = args.out_dir or os.path.join(os.path.dirname(os.path.abspath(args.results)), "figures")
    for fig in render_results(args.results, out_dir):
        print(f"wrote {fig}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dccd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="sample a random DAG (or a network file) and a dataset")
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--edge-prob", type=float, default=None)
    p.add_argument("--noise", default="gaussian",
                   choices=["gaussian", "exponential", "gamma", "uniform"])
    p.add_argument("--weight-low", type=float, default=0.5)
    p.add_argument("--weight-high", type=float, default=0.9)
    p.add_argument("--network", default=None, help="gaussian-network JSON to sample instead")
    p.add_argument("--out-data", required=True)
    p.add_argument("--out-truth", default=None)
    p.add_argument("--out-sem", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("scaffold", help="build the spanning-tree super-structure")
    p.add_argument("--data", required=True)
    _add_measure_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_scaffold)

    p = sub.add_parser("partition", help="split a scaffold into blocks")
    p.add_argument("--scaffold", required=True)
    p.add_argument("--max-block-size", type=int, default=None)
    p.add_argument("--min-blocks", type=int, default=1)
    p.add_argument("--expand", action="store_true", help="apply the 1-hop causal expansion")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("learn", help="run the full divide-and-conquer pipeline")
    p.add_argument("--data", required=True)
    _add_measure_args(p)
    _add_engine_args(p)
    p.add_argument("--max-block-size", type=int, default=None)
    p.add_argument("--min-blocks", type=int, default=1)
    p.add_argument("--no-partition", action="store_true", help="ablation: skip the divide step")
    p.add_argument("--seed", type=int, default=0, help="stamped into the run report")
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("baseline-pc", help="PC-stable skeleton baseline")
    p.add_argument("--data", required=True)
    _add_engine_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_baseline_pc)

    p = sub.add_parser("eval", help="score predicted skeletons against a truth file")
    p.add_argument("--pred", nargs="+", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--ci-tests", nargs="*", type=int, default=None)
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="run a declarative experiment grid")
    p.add_argument("--spec", required=True)
    p.add_argument("--out-dir", default=None, help="defaults to $DCCD_OUT_DIR or bench-out")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--figures", action="store_true", help="also render figures")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="render figures from a bench results CSV")
    p.add_argument("--results", required=True)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: [{args.command}] {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
