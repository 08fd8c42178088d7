"""Render figures from bench result CSVs.

One PNG per metric: line plots of metric vs node count for ablation-style
grids, grouped bars by measure and noise family for the measure comparison,
and bars by variant for benchmarks.  Figures land next to the delimited
output so a results directory is self-contained.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

METRICS = ("precision", "recall", "accuracy", "f1", "shd", "ci_tests")

METRIC_LABELS = {
    "precision": "Precision",
    "recall": "Recall",
    "accuracy": "Accuracy",
    "f1": "F1-score",
    "shd": "Structural Hamming distance",
    "ci_tests": "Unique CI tests",
}

VARIANT_COLORS = {
    "pipeline": "tab:blue",
    "no-partition": "tab:green",
    "pc-stable": "tab:orange",
}

NOISE_COLORS = {
    "gaussian": "tab:green",
    "exponential": "tab:purple",
    "gamma": "tab:blue",
    "uniform": "tab:orange",
}


def read_rows(results_csv) -> list[dict]:
    with open(results_csv, "r", newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _mean(values: list[float]) -> float:
    return sum(values) / len(values)


def _grouped_means(rows, keys, metric) -> dict[tuple, float]:
    bucket = defaultdict(list)
    for row in rows:
        bucket[tuple(row[k] for k in keys)].append(float(row[metric]))
    return {k: _mean(v) for k, v in bucket.items()}


def _plot_vs_p(rows, metric, path) -> None:
    means = _grouped_means(rows, ("variant", "p"), metric)
    variants = sorted({k[0] for k in means})
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for variant in variants:
        pts = sorted((int(p), m) for (v, p), m in means.items() if v == variant)
        ax.plot(
            [x for x, _ in pts],
            [y for _, y in pts],
            marker="o",
            label=variant,
            color=VARIANT_COLORS.get(variant),
        )
    ax.set_xlabel("number of nodes")
    ax.set_ylabel(METRIC_LABELS[metric])
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _plot_measure_bars(rows, metric, path) -> None:
    means = _grouped_means(rows, ("measure", "noise"), metric)
    measures = sorted({k[0] for k in means})
    noises = [n for n in NOISE_COLORS if any(k[1] == n for k in means)]
    noises += sorted({k[1] for k in means} - set(noises))
    width = 0.8 / max(len(noises), 1)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for offset, noise in enumerate(noises):
        xs = [i + offset * width for i in range(len(measures))]
        ys = [means.get((m, noise), 0.0) for m in measures]
        ax.bar(xs, ys, width=width, label=noise, color=NOISE_COLORS.get(noise))
    ax.set_xticks([i + width * (len(noises) - 1) / 2 for i in range(len(measures))])
    ax.set_xticklabels(measures)
    ax.set_xlabel("scaffold measure")
    ax.set_ylabel(METRIC_LABELS[metric])
    ax.legend()
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _plot_variant_bars(rows, metric, path) -> None:
    means = _grouped_means(rows, ("variant",), metric)
    variants = sorted(k[0] for k in means)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.bar(
        range(len(variants)),
        [means[(v,)] for v in variants],
        color=[VARIANT_COLORS.get(v) for v in variants],
        width=0.6,
    )
    ax.set_xticks(range(len(variants)))
    ax.set_xticklabels(variants)
    ax.set_ylabel(METRIC_LABELS[metric])
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_results(results_csv, out_dir) -> list[Path]:
    """Dispatch on the experiment column and write one figure per metric."""
    rows = read_rows(results_csv)
    if not rows:
        raise ValueError(f"{results_csv}: no rows to plot")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    experiment = rows[0]["experiment"]
    p_count = len({row["p"] for row in rows})
    measure_count = len({row["measure"] for row in rows})

    written = []
    for metric in METRICS:
        path = out / f"{experiment}_{metric}.png"
        if measure_count > 1:
            _plot_measure_bars(rows, metric, path)
        elif p_count > 1:
            _plot_vs_p(rows, metric, path)
        else:
            _plot_variant_bars(rows, metric, path)
        written.append(path)
    return written
