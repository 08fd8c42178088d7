"""Declarative experiment grids and the bench driver.

A spec file names one of three experiment families (ablation of the divide
step, scaffold-measure comparison, benchmark against PC-stable), the grid axes
and the engine settings.  Every cell derives its own seed from the spec seed
and the cell coordinates, so any cell can be regenerated in isolation.  Metric
rows are deterministic and sorted before writing; wall-times go to a separate
timings file so result files are byte-identical across re-runs.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .core import Dataset, Skeleton
from .datagen import GenConfig, NoiseSpec, generate_dag, load_gaussian_network, sample_sem
from .dependence import DependenceMeasure
from .learner import LearnConfig, RunReport, run_pc_baseline, run_pipeline
from .metrics import score_skeleton
from .partition import PartitionConfig

log = logging.getLogger("dccd.bench")

EXPERIMENTS = ("ablation", "measure-comparison", "benchmark")
VARIANTS = ("pipeline", "no-partition", "pc-stable")

KEY_COLUMNS = ("experiment", "p", "n", "measure", "noise", "variant", "graph", "run", "seed", "config_hash")
METRIC_COLUMNS = ("precision", "recall", "accuracy", "f1", "shd", "ci_tests")
STAGE_COLUMNS = ("scaffold", "partition", "subgraphs", "merge", "pc_stable", "total")

_DEFAULTS = {
    "ablation": dict(
        p=list(range(20, 41, 2)),
        noises=["gaussian"],
        measures=["ce"],
        variants=["pipeline", "no-partition"],
        graphs=5,
        runs=4,
    ),
    "measure-comparison": dict(
        p=[24],
        noises=["gaussian", "exponential", "gamma", "uniform"],
        measures=["ce", "mi", "pearson", "spearman"],
        variants=["pipeline"],
        graphs=2,
        runs=2,
    ),
    "benchmark": dict(
        p=[],
        noises=["gaussian"],
        measures=["ce"],
        variants=["pipeline", "pc-stable"],
        graphs=10,
        runs=4,
    ),
}


@dataclass(frozen=True)
class ExperimentSpec:
    experiment: str
    p: tuple[int, ...]
    noises: tuple[str, ...]
    measures: tuple[str, ...]
    variants: tuple[str, ...]
    graphs: int
    runs: int
    n: int = 5000
    alpha: float = 0.05
    knn: int = 3
    max_order: int | None = None
    max_block_size: int | None = None
    min_blocks: int = 1
    edge_prob: float | None = None
    weight_range: tuple[float, float] = (0.5, 0.9)
    seed: int = 0
    network: str | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        for v in self.variants:
            if v not in VARIANTS:
                raise ValueError(f"unknown variant {v!r}")
        if self.graphs < 1 or self.runs < 1:
            raise ValueError("graphs and runs must be >= 1")
        if self.network is None and not self.p:
            raise ValueError("need a node-count list or a network file")


def spec_from_dict(doc: dict) -> ExperimentSpec:
    experiment = doc.get("experiment")
    if experiment not in EXPERIMENTS:
        raise ValueError(f"spec must set experiment to one of {EXPERIMENTS}")
    merged = dict(_DEFAULTS[experiment])
    merged.update({k: v for k, v in doc.items() if k != "experiment"})
    if "datasets" in merged:  # benchmark alias
        merged["graphs"] = merged.pop("datasets")
    return ExperimentSpec(
        experiment=experiment,
        p=tuple(int(v) for v in merged["p"]),
        noises=tuple(merged["noises"]),
        measures=tuple(merged["measures"]),
        variants=tuple(merged["variants"]),
        graphs=int(merged["graphs"]),
        runs=int(merged["runs"]),
        n=int(merged.get("n", 5000)),
        alpha=float(merged.get("alpha", 0.05)),
        knn=int(merged.get("knn", 3)),
        max_order=merged.get("max_order"),
        max_block_size=merged.get("max_block_size"),
        min_blocks=int(merged.get("min_blocks", 1)),
        edge_prob=merged.get("edge_prob"),
        weight_range=tuple(merged.get("weight_range", (0.5, 0.9))),
        seed=int(merged.get("seed", 0)),
        network=merged.get("network"),
    )


def load_spec(path) -> ExperimentSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return spec_from_dict(json.load(fh))


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from arbitrary coordinates (not Python's hash())."""
    text = "|".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass(frozen=True)
class Cell:
    p: int
    measure: str
    noise: str
    graph: int
    graph_seed: int
    data_seed: int
    config_hash: str


def _cells(spec: ExperimentSpec) -> list[Cell]:
    cells = []
    p_values = spec.p if spec.network is None else (0,)  # resolved after loading
    for p in p_values:
        for measure in spec.measures:
            for noise in spec.noises:
                for graph in range(spec.graphs):
                    coords = (spec.seed, spec.experiment, p, measure, noise, graph)
                    payload = json.dumps(
                        {
                            "experiment": spec.experiment,
                            "p": p,
                            "n": spec.n,
                            "measure": measure,
                            "noise": noise,
                            "graph": graph,
                            "alpha": spec.alpha,
                            "knn": spec.knn,
                            "max_order": spec.max_order,
                            "max_block_size": spec.max_block_size,
                            "min_blocks": spec.min_blocks,
                            "edge_prob": spec.edge_prob,
                            "weight_range": list(spec.weight_range),
                            "seed": spec.seed,
                            "network": spec.network,
                        },
                        sort_keys=True,
                    )
                    cells.append(
                        Cell(
                            p=p,
                            measure=measure,
                            noise=noise,
                            graph=graph,
                            graph_seed=derive_seed(*coords, "graph"),
                            data_seed=derive_seed(*coords, "data"),
                            config_hash=hashlib.sha256(payload.encode()).hexdigest()[:12],
                        )
                    )
    return cells


def run_variant(
    variant: str, dataset: Dataset, spec: ExperimentSpec, cell: Cell
) -> tuple[Skeleton, RunReport]:
    cfg = LearnConfig(
        alpha=spec.alpha,
        max_order=spec.max_order,
        measure=DependenceMeasure(cell.measure, spec.knn),
        partition=PartitionConfig(spec.max_block_size, spec.min_blocks),
        use_partition=(variant == "pipeline"),
        seed=cell.data_seed,
    )
    if variant == "pc-stable":
        return run_pc_baseline(dataset, cfg)
    return run_pipeline(dataset, cfg)


def _run_cell(spec: ExperimentSpec, cell: Cell, network_sem) -> tuple[list[dict], list[dict]]:
    if network_sem is not None:
        sem = network_sem
        truth = sem.skeleton()
        p = sem.p
    else:
        gen = GenConfig(
            p=cell.p,
            n=spec.n,
            edge_prob=spec.edge_prob,
            weight_range=spec.weight_range,
            noise=NoiseSpec(cell.noise),
            seed=cell.graph_seed,
        )
        sem, truth = generate_dag(gen)
        p = cell.p
    dataset = sample_sem(sem, spec.n, cell.data_seed)

    rows, timing_rows = [], []
    for variant in spec.variants:
        for run in range(spec.runs):
            skeleton, report = run_variant(variant, dataset, spec, cell)
            score = score_skeleton(skeleton, truth, report.unique_ci_tests)
            key = {
                "experiment": spec.experiment,
                "p": p,
                "n": spec.n,
                "measure": cell.measure,
                "noise": cell.noise,
                "variant": variant,
                "graph": cell.graph,
                "run": run,
                "seed": cell.data_seed,
                "config_hash": cell.config_hash,
            }
            rows.append(
                {
                    **key,
                    "precision": score.precision,
                    "recall": score.recall,
                    "accuracy": score.accuracy,
                    "f1": score.f1,
                    "shd": score.shd,
                    "ci_tests": score.ci_tests,
                }
            )
            timing_rows.append(
                {**key, **{f"wall_ms_{s}": report.stage_ms.get(s) for s in STAGE_COLUMNS}}
            )
    return rows, timing_rows


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(path: Path, columns: tuple[str, ...], rows: list[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c)) for c in columns])


def _row_key(row: dict):
    return (
        row["experiment"],
        row["p"],
        row["measure"],
        row["noise"],
        row["variant"],
        row["graph"],
        row["run"],
    )


def aggregate_rows(rows: list[dict]) -> list[dict]:
    """Mean and sample stddev per metric, grouped over graphs and runs."""
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        key = (row["experiment"], row["p"], row["measure"], row["noise"], row["variant"])
        groups.setdefault(key, []).append(row)
    out = []
    for key in sorted(groups, key=lambda k: tuple(str(x) for x in k)):
        members = groups[key]
        agg = {
            "experiment": key[0],
            "p": key[1],
            "measure": key[2],
            "noise": key[3],
            "variant": key[4],
            "rows": len(members),
        }
        for metric in METRIC_COLUMNS:
            vals = [float(m[metric]) for m in members]
            mean = sum(vals) / len(vals)
            if len(vals) > 1:
                std = (sum((v - mean) ** 2 for v in vals) / (len(vals) - 1)) ** 0.5
            else:
                std = 0.0
            agg[f"{metric}_mean"] = mean
            agg[f"{metric}_std"] = std
        out.append(agg)
    return out


def run_bench(spec: ExperimentSpec, out_dir, threads: int = 1) -> dict[str, Path]:
    """Execute every grid cell and write results/aggregates/timings CSVs.

    A failing cell is logged with its coordinates and skipped; it never poisons
    the rest of the grid.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    network_sem = load_gaussian_network(spec.network) if spec.network else None
    cells = _cells(spec)

    rows: list[dict] = []
    timing_rows: list[dict] = []

    def worker(cell: Cell):
        try:
            return _run_cell(spec, cell, network_sem)
        except Exception:
            log.exception(
                "cell failed: experiment=%s p=%s measure=%s noise=%s graph=%s seed=%s",
                spec.experiment, cell.p, cell.measure, cell.noise, cell.graph, cell.data_seed,
            )
            return [], []

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for cell_rows, cell_timings in pool.map(worker, cells):
                rows.extend(cell_rows)
                timing_rows.extend(cell_timings)
    else:
        for cell in cells:
            cell_rows, cell_timings = worker(cell)
            rows.extend(cell_rows)
            timing_rows.extend(cell_timings)

    rows.sort(key=_row_key)
    timing_rows.sort(key=_row_key)
    aggregates = aggregate_rows(rows)

    paths = {
        "results": out / "results.csv",
        "aggregates": out / "aggregates.csv",
        "timings": out / "timings.csv",
    }
    _write_csv(paths["results"], KEY_COLUMNS + METRIC_COLUMNS, rows)
    agg_columns = ("experiment", "p", "measure", "noise", "variant", "rows") + tuple(
        f"{m}_{stat}" for m in METRIC_COLUMNS for stat in ("mean", "std")
    )
    _write_csv(paths["aggregates"], agg_columns, aggregates)
    timing_columns = KEY_COLUMNS + tuple(f"wall_ms_{s}" for s in STAGE_COLUMNS)
    _write_csv(paths["timings"], timing_columns, timing_rows)
    return paths
