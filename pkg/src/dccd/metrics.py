"""Skeleton scoring over unordered variable pairs.

Conventions for degenerate rates: precision is 1 when nothing was predicted,
recall is 1 when the truth has no edges, F1 is 0 when both components vanish.
This makes empty-vs-empty comparisons perfect rather than undefined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Sequence

from .core import Skeleton

METRIC_FIELDS = ("tp", "fp", "fn", "tn", "precision", "recall", "accuracy", "f1", "shd", "ci_tests")


@dataclass(frozen=True)
class SkeletonScore:
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    accuracy: float
    f1: float
    shd: int
    ci_tests: int


def score_skeleton(predicted: Skeleton, truth: Skeleton, ci_tests: int = 0) -> SkeletonScore:
    """Classify each of the C(p,2) unordered pairs; SHD is fp + fn.

    ``ci_tests`` is carried through from the run report, never recomputed.
    """
    if predicted.p != truth.p:
        raise ValueError(f"dimension mismatch: {predicted.p} vs {truth.p}")
    pairs = predicted.p * (predicted.p - 1) // 2
    tp = len(predicted.edges & truth.edges)
    fp = len(predicted.edges - truth.edges)
    fn = len(truth.edges - predicted.edges)
    tn = pairs - tp - fp - fn
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    accuracy = (tp + tn) / pairs
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return SkeletonScore(tp, fp, fn, tn, precision, recall, accuracy, f1, fp + fn, ci_tests)


def aggregate_scores(scores: Sequence[SkeletonScore]) -> dict[str, tuple[float, float]]:
    """Per-field arithmetic mean and sample standard deviation (0 for one score)."""
    if not scores:
        raise ValueError("no scores to aggregate")
    out: dict[str, tuple[float, float]] = {}
    k = len(scores)
    for f in fields(SkeletonScore):
        vals = [float(getattr(s, f.name)) for s in scores]
        mean = sum(vals) / k
        if k > 1:
            var = sum((v - mean) ** 2 for v in vals) / (k - 1)
            std = math.sqrt(var)
        else:
            std = 0.0
        out[f.name] = (mean, std)
    return out
