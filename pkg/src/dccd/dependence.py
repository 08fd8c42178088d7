"""Pairwise dependence measures and the dependency matrix.

Copula entropy and mutual information use the Kraskov-style k-nearest-neighbor
estimator (Chebyshev metric); copula entropy runs it on rank pseudo-observations
and negates, since the entropy of the copula density equals minus the mutual
information.  All measures are canonicalized internally so m(x, y) == m(y, x)
bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import digamma
from scipy.stats import rankdata

from .core import Dataset, WeightedGraph

MEASURE_TAGS = ("ce", "mi", "pearson", "spearman")

_ALIASES = {
    "ce": "ce",
    "copula-entropy": "ce",
    "mi": "mi",
    "mutual-information": "mi",
    "pearson": "pearson",
    "spearman": "spearman",
}


@dataclass(frozen=True)
class DependenceMeasure:
    """A measure tag plus estimator settings (k for the nearest-neighbor ones)."""

    tag: str = "ce"
    k: int = 3

    def __post_init__(self):
        tag = _ALIASES.get(self.tag)
        if tag is None:
            raise ValueError(f"unknown measure {self.tag!r}; expected one of {MEASURE_TAGS}")
        object.__setattr__(self, "tag", tag)
        if self.k < 1:
            raise ValueError("k must be >= 1")


def _check_column(x: np.ndarray, label: str) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.size < 2:
        raise ValueError(f"{label}: need at least 2 samples")
    if np.ptp(x) == 0:
        raise ValueError(f"{label}: constant column")
    return x


def _canonical_pair(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # fixed argument order makes every estimate bitwise symmetric
    if x.tobytes() > y.tobytes():
        return y, x
    return x, y


def empirical_copula(x, y) -> tuple[np.ndarray, np.ndarray]:
    """Rank pseudo-observations u_i = rank(x_i)/(n+1); ties get average ranks.

    The n+1 denominator keeps every value strictly inside (0, 1).
    """
    x = _check_column(x, "x")
    y = _check_column(y, "y")
    if x.size != y.size:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    n = x.size
    return rankdata(x) / (n + 1), rankdata(y) / (n + 1)


def _strict_window_counts(values: np.ndarray, eps: np.ndarray) -> np.ndarray:
    """For each i, the number of j != i with |values[j] - values[i]| < eps[i]."""
    order = np.sort(values)
    lo = np.searchsorted(order, values - eps, side="right")
    hi = np.searchsorted(order, values + eps, side="left")
    return np.maximum(hi - lo - 1, 0)


def _knn_mi(x: np.ndarray, y: np.ndarray, k: int) -> float:
    """Kraskov estimator (variant 1) of I(X;Y) in nats, Chebyshev metric."""
    n = x.size
    if k >= n:
        raise ValueError(f"k={k} requires more than k samples, got n={n}")
    points = np.column_stack((x, y))
    tree = cKDTree(points)
    # distance to the k-th neighbor, self excluded
    eps = tree.query(points, k=k + 1, p=np.inf, workers=-1)[0][:, k]
    nx = _strict_window_counts(x, eps)
    ny = _strict_window_counts(y, eps)
    return float(digamma(k) + digamma(n) - np.mean(digamma(nx + 1) + digamma(ny + 1)))


def copula_entropy(x, y, k: int = 3) -> float:
    """Entropy of the pair's empirical copula density, in nats (<= 0 up to noise).

    Estimated as the negated nearest-neighbor mutual information of the
    pseudo-observations; |result| is the dependence strength used downstream.
    """
    x = _check_column(x, "x")
    y = _check_column(y, "y")
    x, y = _canonical_pair(x, y)
    u, v = empirical_copula(x, y)
    return -_knn_mi(u, v, k)


def mutual_information(x, y, k: int = 3) -> float:
    """Nearest-neighbor mutual information of the raw values, in nats."""
    x = _check_column(x, "x")
    y = _check_column(y, "y")
    x, y = _canonical_pair(x, y)
    return _knn_mi(x, y, k)


def pearson(x, y) -> float:
    x = _check_column(x, "x")
    y = _check_column(y, "y")
    x, y = _canonical_pair(x, y)
    xc = x - x.mean()
    yc = y - y.mean()
    denom = np.sqrt(np.dot(xc, xc) * np.dot(yc, yc))
    r = float(np.dot(xc, yc) / denom)
    return min(1.0, max(-1.0, r))


def spearman(x, y) -> float:
    x = _check_column(x, "x")
    y = _check_column(y, "y")
    return pearson(rankdata(x), rankdata(y))


def pairwise_strength(x, y, measure: DependenceMeasure) -> float:
    """Nonnegative dependence strength under the given measure."""
    if measure.tag == "ce":
        return abs(copula_entropy(x, y, measure.k))
    if measure.tag == "mi":
        return max(0.0, mutual_information(x, y, measure.k))
    if measure.tag == "pearson":
        return abs(pearson(x, y))
    if measure.tag == "spearman":
        return abs(spearman(x, y))
    raise ValueError(f"unknown measure {measure.tag!r}")


def dependency_matrix(dataset: Dataset, measure: DependenceMeasure) -> WeightedGraph:
    """Symmetric matrix of pairwise dependence strengths over all C(p,2) pairs."""
    if measure.tag in ("ce", "mi") and measure.k >= dataset.n:
        raise ValueError(f"k={measure.k} too large for n={dataset.n}")
    p = dataset.p
    weights = np.zeros((p, p), dtype=float)
    for i in range(p):
        for j in range(i + 1, p):
            try:
                w = pairwise_strength(dataset.column(i), dataset.column(j), measure)
            except ValueError as exc:
                raise ValueError(
                    f"pair ({dataset.names[i]}, {dataset.names[j]}): {exc}"
                ) from None
            weights[i, j] = weights[j, i] = w
    return WeightedGraph(weights)
