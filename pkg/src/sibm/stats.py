"""Per-vertex graph statistics and sample-to-truth distances."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .model import LabeledGraph, ValidationError, check_spins

__all__ = [
    "VertexCounts",
    "neighbor_counts",
    "exp_sum",
    "exp_sum_from_histogram",
    "d_histogram",
    "dist",
    "dist_pm",
    "dist_ones",
    "align_sign",
    "tv_distance",
    "empirical_distribution",
]


@dataclass(frozen=True)
class VertexCounts:
    """A_i (same-label neighbours) and B_i (opposite-label neighbours)."""

    a_counts: np.ndarray
    b_counts: np.ndarray

    @property
    def imbalance(self) -> np.ndarray:
        """B_i - A_i."""
        return self.b_counts - self.a_counts


def neighbor_counts(graph: LabeledGraph) -> VertexCounts:
    labels = graph.labels.astype(np.int64)
    src = np.repeat(np.arange(graph.n), graph.degrees)
    same = labels[src] == labels[graph.indices]
    a_counts = np.bincount(src[same], minlength=graph.n)
    b_counts = graph.degrees - a_counts
    return VertexCounts(a_counts=a_counts, b_counts=b_counts)


def exp_sum(graph: LabeledGraph, beta: float) -> float:
    """sum_i exp(2 beta (B_i - A_i)), accumulated with a max shift."""
    k = neighbor_counts(graph).imbalance
    return float(np.exp(logsumexp(2.0 * beta * k)))


def d_histogram(graph: LabeledGraph) -> dict[int, int]:
    """Count of vertices at each integer value of B_i - A_i."""
    values, counts = np.unique(neighbor_counts(graph).imbalance, return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts)}


def exp_sum_from_histogram(hist: dict[int, int], beta: float) -> float:
    keys = np.array(list(hist), dtype=np.float64)
    weights = np.array(list(hist.values()), dtype=np.float64)
    return float(np.exp(logsumexp(2.0 * beta * keys, b=weights)))


def _pair(sigma, x):
    s = check_spins(sigma)
    x = check_spins(x, name="x")
    if s.shape != x.shape:
        raise ValidationError(f"length mismatch: {s.shape[0]} vs {x.shape[0]}")
    return s, x


def dist(sigma, x) -> int:
    """Hamming distance."""
    s, x = _pair(sigma, x)
    return int(np.count_nonzero(s != x))


def dist_pm(sigma, x) -> int:
    """Distance to the nearer of x and -x."""
    d = dist(sigma, x)
    return min(d, len(x) - d)


def dist_ones(sigma) -> int:
    """Distance to the nearer of the all-ones vector and its negation."""
    s = check_spins(sigma)
    d = int(np.count_nonzero(s < 0))
    return min(d, s.shape[0] - d)


def align_sign(reference, other) -> int:
    """-1 iff <reference, other> < 0; ties keep the sample as-is."""
    r, o = _pair(other, reference)
    return -1 if int(np.dot(r.astype(np.int64), o)) < 0 else 1


def empirical_distribution(indices, size: int) -> np.ndarray:
    counts = np.bincount(np.asarray(indices, dtype=np.int64), minlength=size)
    return counts / counts.sum()


def tv_distance(p, q) -> float:
    return 0.5 * float(np.abs(np.asarray(p, dtype=float) - np.asarray(q, dtype=float)).sum())
