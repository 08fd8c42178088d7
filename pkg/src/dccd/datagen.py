"""Random DAG generation and linear-SEM sampling.

The default edge probability 0.075*p/(p-1) over the C(p,2) lower-triangular
slots gives an expected total edge count of C(p,2)*q = 0.0375*p^2 and an
expected in-degree of 0.0375*p; the graph is then relabeled by a uniformly
random permutation so the topological order is not the index order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import Dataset, GaussianSEM, NoiseSpec, Skeleton, canonical_edge


def default_edge_prob(p: int) -> float:
    return 0.075 * p / (p - 1)


@dataclass(frozen=True)
class GenConfig:
    """Parameters for one synthetic graph + dataset draw."""

    p: int
    n: int = 5000
    edge_prob: float | None = None  # None -> 0.075*p/(p-1)
    weight_range: tuple[float, float] = (0.5, 0.9)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    seed: int = 0

    def __post_init__(self):
        if self.p < 2:
            raise ValueError("p must be >= 2")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        q = self.resolved_edge_prob()
        if not (0 < q <= 1):
            raise ValueError(f"edge probability {q} outside (0, 1]")
        low, high = self.weight_range
        if not (math.isfinite(low) and math.isfinite(high) and low <= high):
            raise ValueError(f"bad weight range {self.weight_range}")

    def resolved_edge_prob(self) -> float:
        return default_edge_prob(self.p) if self.edge_prob is None else float(self.edge_prob)


def generate_dag(cfg: GenConfig) -> tuple[GaussianSEM, Skeleton]:
    """Sample a random DAG and its undirected ground-truth skeleton.

    Each strictly-lower-triangular adjacency slot is an independent
    Bernoulli(edge_prob) draw; the pattern is relabeled by a random
    permutation, then each present arc gets an independent Uniform[low, high]
    coefficient.  Deterministic given cfg.seed.
    """
    rng = np.random.default_rng(cfg.seed)
    p = cfg.p
    q = cfg.resolved_edge_prob()

    lower = np.tril(rng.random((p, p)) < q, k=-1)
    # lower[i, j] set means arc j -> i; store pattern as [parent, child]
    pattern = lower.T

    perm = rng.permutation(p)
    relabeled = np.zeros_like(pattern)
    relabeled[np.ix_(perm, perm)] = pattern

    low, high = cfg.weight_range
    weights = np.zeros((p, p), dtype=float)
    weights[relabeled] = rng.uniform(low, high, size=int(relabeled.sum()))

    sem = GaussianSEM(weights, tuple(cfg.noise for _ in range(p)))
    return sem, sem.skeleton()


def _draw_noise(spec: NoiseSpec, rng: np.random.Generator, n: int) -> np.ndarray:
    # non-gaussian families are centered to mean zero for comparability
    if spec.family == "gaussian":
        return spec.scale * rng.standard_normal(n)
    if spec.family == "exponential":
        return spec.scale * (rng.exponential(1.0, n) - 1.0)
    if spec.family == "gamma":
        return spec.scale * (rng.gamma(2.0, 1.0, n) - 2.0)
    if spec.family == "uniform":
        return spec.scale * rng.uniform(-1.0, 1.0, n)
    raise ValueError(f"unknown noise family {spec.family!r}")


def sample_sem(sem: GaussianSEM, n: int, seed: int) -> Dataset:
    """Draw n samples from the linear SEM, deterministic given seed.

    Noise columns are drawn in variable-index order so a variable's noise
    stream does not depend on the graph structure.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    p = sem.p
    noise = np.empty((n, p), dtype=float)
    for j in range(p):
        noise[:, j] = _draw_noise(sem.noises[j], rng, n)

    values = np.zeros((n, p), dtype=float)
    for j in sem.topological_order():
        parents = sem.parents(j)
        values[:, j] = noise[:, j]
        if parents.size:
            values[:, j] += values[:, parents] @ sem.weights[parents, j]

    names = sem.names if sem.names is not None else tuple(f"X{i}" for i in range(p))
    return Dataset(names, values)


# ---------------------------------------------------------------------------
# Gaussian-network JSON format:
#   {"nodes": [{"name": str, "noise_sd": float,
#               "parents": [{"name": str, "coef": float}]}]}
# ---------------------------------------------------------------------------


def load_gaussian_network(path) -> GaussianSEM:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: malformed JSON: {exc}") from None
    if not isinstance(doc, dict) or "nodes" not in doc:
        raise ValueError(f"{path}: document must have a 'nodes' list")
    nodes = doc["nodes"]
    names = [str(node["name"]) for node in nodes]
    if len(set(names)) != len(names):
        raise ValueError(f"{path}: duplicate node names")
    index = {name: i for i, name in enumerate(names)}
    p = len(names)
    if p < 2:
        raise ValueError(f"{path}: need at least 2 nodes")

    weights = np.zeros((p, p), dtype=float)
    noises = []
    for j, node in enumerate(nodes):
        sd = float(node.get("noise_sd", 1.0))
        noises.append(NoiseSpec("gaussian", sd))
        for parent in node.get("parents", []):
            pname = str(parent["name"])
            if pname not in index:
                raise ValueError(f"{path}: node {names[j]!r} has unknown parent {pname!r}")
            weights[index[pname], j] = float(parent["coef"])

    try:
        return GaussianSEM(weights, tuple(noises), tuple(names))
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


def save_gaussian_network(sem: GaussianSEM, path) -> None:
    names = sem.names if sem.names is not None else tuple(f"X{i}" for i in range(sem.p))
    nodes = []
    for j in range(sem.p):
        spec = sem.noises[j]
        if spec.family != "gaussian":
            raise ValueError("network JSON only carries gaussian noise")
        nodes.append(
            {
                "name": names[j],
                "noise_sd": spec.scale,
                "parents": [
                    {"name": names[int(i)], "coef": float(sem.weights[i, j])}
                    for i in sem.parents(j)
                ],
            }
        )
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"nodes": nodes}, fh, indent=1)
        fh.write("\n")
