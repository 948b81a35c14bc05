"""Two-community symmetric stochastic block model."""

from __future__ import annotations

import numpy as np

from .model import LabeledGraph, SibmParams, ValidationError, check_partition, validate_params
from .utils import as_generator

__all__ = ["random_balanced_partition", "sample_sbm_graph", "generate_ssbm"]


def random_balanced_partition(n: int, rng=None) -> np.ndarray:
    """Uniform balanced labelling: Fisher-Yates shuffle of n/2 (+1) and n/2 (-1)."""
    if n < 2 or n % 2:
        raise ValidationError(f"n must be even and positive, got {n}")
    rng = as_generator(rng)
    labels = np.repeat(np.array([1, -1], dtype=np.int8), n // 2)
    rng.shuffle(labels)
    return labels


def sample_sbm_graph(labels, p: float, q: float, rng=None) -> LabeledGraph:
    """Draw G given labels: within-pairs w.p. ``p``, cross-pairs w.p. ``q``.

    Visits all C(n, 2) pairs row by row, one uniform per pair, so the draw is
    a deterministic function of the generator state.
    """
    labels = check_partition(labels)
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
        raise ValidationError(f"edge probabilities must lie in [0, 1], got p={p}, q={q}")
    rng = as_generator(rng)
    n = labels.shape[0]
    src, dst = [], []
    for i in range(n - 1):
        rest = labels[i + 1:]
        prob = np.where(rest == labels[i], p, q)
        hit = np.flatnonzero(rng.random(n - 1 - i) < prob)
        if hit.size:
            src.append(np.full(hit.size, i, dtype=np.int64))
            dst.append(hit + (i + 1))
    if src:
        edges = np.column_stack([np.concatenate(src), np.concatenate(dst)])
    else:
        edges = np.empty((0, 2), dtype=np.int64)
    return LabeledGraph.from_edges(labels, edges)


def generate_ssbm(params: SibmParams, rng=None) -> LabeledGraph:
    """Draw (X, G) from SSBM(n, a ln n / n, b ln n / n)."""
    validate_params(params)
    rng = as_generator(rng)
    labels = random_balanced_partition(params.n, rng)
    return sample_sbm_graph(labels, params.p, params.q, rng)
