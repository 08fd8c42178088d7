"""Conditional-independence testing with a canonicalizing result cache.

The number of unique queries answered is the cost metric for every learner in
this package, so all tests go through :class:`CICache`, which canonicalizes
(i, j | S) before lookup and counts each distinct query exactly once no matter
how often it is asked.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Iterable, Protocol

import numpy as np
from scipy.special import erfc

from .core import Dataset

Query = tuple[int, int, tuple[int, ...]]


def canonical_query(i: int, j: int, s: Iterable[int] = ()) -> Query:
    """Normalize to i < j with a sorted, duplicate-free conditioning tuple."""
    i, j = int(i), int(j)
    if i == j:
        raise ValueError(f"query needs two distinct variables, got {i}")
    if i > j:
        i, j = j, i
    cond = tuple(sorted(set(int(v) for v in s)))
    if i in cond or j in cond:
        raise ValueError(f"conditioning set {cond} contains a tested variable")
    return i, j, cond


@dataclass(frozen=True)
class CIResult:
    statistic: float
    p_value: float
    independent: bool


class CIEngine(Protocol):
    tag: str
    alpha: float

    def test(self, i: int, j: int, s: tuple[int, ...]) -> CIResult: ...


class FisherZ:
    """Partial-correlation z-test against a precomputed correlation matrix.

    The partial correlation of (i, j) given S comes from the precision matrix
    of the correlation submatrix over {i, j} | S; singular submatrices get one
    ridge retry (+1e-8 on the diagonal) before giving up.
    """

    tag = "fisher-z"

    _RIDGE = 1e-8
    _CLAMP = 1e-12

    def __init__(self, dataset: Dataset, alpha: float = 0.05):
        if not (0 < alpha < 1):
            raise ValueError(f"alpha must be in (0, 1), got {alpha}")
        self.alpha = float(alpha)
        self.n = dataset.n
        self._corr = np.corrcoef(dataset.values, rowvar=False)
        if not np.all(np.isfinite(self._corr)):
            raise ValueError("correlation matrix has non-finite entries (constant column?)")

    def _partial_corr(self, idx: tuple[int, ...]) -> float:
        sub = self._corr[np.ix_(idx, idx)]
        for attempt in range(2):
            try:
                prec = np.linalg.inv(sub if attempt == 0 else sub + self._RIDGE * np.eye(len(idx)))
            except np.linalg.LinAlgError:
                continue
            denom = prec[0, 0] * prec[1, 1]
            if np.all(np.isfinite(prec)) and denom > 0:
                return float(-prec[0, 1] / math.sqrt(denom))
        raise ValueError(f"correlation submatrix for {idx} is singular even after ridge")

    def test(self, i: int, j: int, s: tuple[int, ...] = ()) -> CIResult:
        i, j, s = canonical_query(i, j, s)
        m = len(s)
        if self.n <= m + 3:
            raise ValueError(f"need n > |S|+3 samples: n={self.n}, |S|={m}")
        r = self._partial_corr((i, j, *s))
        r = min(1.0 - self._CLAMP, max(-1.0 + self._CLAMP, r))
        z = 0.5 * math.log((1.0 + r) / (1.0 - r)) * math.sqrt(self.n - m - 3)
        p_value = float(erfc(abs(z) / math.sqrt(2.0)))  # == 2*(1 - Phi(|z|))
        return CIResult(z, p_value, p_value > self.alpha)


def fisher_z(dataset: Dataset, i: int, j: int, s: Iterable[int] = (), alpha: float = 0.05) -> CIResult:
    """One-shot Fisher-z test; builds a throwaway engine, so prefer
    :class:`FisherZ` plus :class:`CICache` inside loops."""
    return FisherZ(dataset, alpha).test(*canonical_query(i, j, s))


class CICache:
    """Canonicalized query -> result map with an exactly-once unique counter.

    Safe for concurrent use: duplicated concurrent computations may race, but
    the stored result is first-writer-wins and engines are deterministic, so
    the cache contents and unique count do not depend on scheduling.  Every
    lookup (hit or miss) is appended to ``log`` for independent recounts.
    """

    def __init__(self):
        self._results: dict[Query, CIResult] = {}
        self._lock = threading.Lock()
        self.log: list[Query] = []

    @property
    def unique_count(self) -> int:
        return len(self._results)

    def seen(self, i: int, j: int, s: Iterable[int] = ()) -> bool:
        return canonical_query(i, j, s) in self._results

    def test(self, engine: CIEngine, i: int, j: int, s: Iterable[int] = ()) -> CIResult:
        query = canonical_query(i, j, s)
        with self._lock:
            self.log.append(query)
            cached = self._results.get(query)
        if cached is not None:
            return cached
        result = engine.test(*query)
        with self._lock:
            return self._results.setdefault(query, result)


def test_cached(cache: CICache, engine: CIEngine, i: int, j: int, s: Iterable[int] = ()) -> CIResult:
    return cache.test(engine, i, j, s)
