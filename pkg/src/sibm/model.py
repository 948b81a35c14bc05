"""Core types for the stochastic Ising block model and their text formats."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

__all__ = [
    "SibmParams",
    "LabeledGraph",
    "ValidationError",
    "RegimeError",
    "validate_params",
    "check_spins",
    "check_partition",
    "check_sample_set",
    "write_graph",
    "read_graph",
    "write_samples",
    "read_samples",
    "format_spins",
]


class ValidationError(ValueError):
    """Invalid parameters or malformed input."""


class RegimeError(ValueError):
    """Parameters fall outside the regime an operation is defined for."""


@dataclass(frozen=True)
class SibmParams:
    """(n, a, b, alpha, beta, m) for SIBM(n, a ln n / n, b ln n / n, alpha, beta, m)."""

    n: int
    a: float
    b: float
    alpha: float
    beta: float
    m: int = 1

    @cached_property
    def p(self) -> float:
        return self.a * math.log(self.n) / self.n

    @cached_property
    def q(self) -> float:
        return self.b * math.log(self.n) / self.n

    @property
    def repulsion(self) -> float:
        """Coefficient alpha * ln(n) / n on non-edge pairs."""
        return self.alpha * math.log(self.n) / self.n


def validate_params(params: SibmParams) -> SibmParams:
    """Return ``params`` unchanged if every invariant holds, else raise."""
    n = params.n
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise ValidationError(f"n must be an integer, got {n!r}")
    if n < 4 or n % 2:
        raise ValidationError(f"n must be even and >= 4, got {n}")
    m = params.m
    if isinstance(m, bool) or not isinstance(m, (int, np.integer)) or m < 1:
        raise ValidationError(f"m must be a positive integer, got {m!r}")
    for name in ("a", "b", "alpha", "beta"):
        value = getattr(params, name)
        if not math.isfinite(value) or value <= 0:
            raise ValidationError(f"{name} must be positive and finite, got {value!r}")
    if params.a <= params.b:
        raise ValidationError(f"a must exceed b (a={params.a}, b={params.b})")
    if params.p > 1 or params.q > 1:
        raise ValidationError(
            f"edge probability exceeds 1 (p={params.p:.5f}, q={params.q:.5f}); "
            "increase n or decrease a"
        )
    return params


def check_spins(sigma, n: int | None = None, name: str = "sigma") -> np.ndarray:
    """Coerce to a 1-d int8 array over {+1, -1}, optionally checking length."""
    arr = np.asarray(sigma)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size and not np.all((arr == 1) | (arr == -1)):
        raise ValidationError(f"{name} must contain only +1/-1 entries")
    if n is not None and arr.shape[0] != n:
        raise ValidationError(f"{name} has length {arr.shape[0]}, expected {n}")
    return arr.astype(np.int8, copy=False)


def check_partition(labels, n: int | None = None) -> np.ndarray:
    arr = check_spins(labels, n, name="labels")
    if int(arr.sum(dtype=np.int64)) != 0:
        raise ValidationError("labels must be balanced (sum to zero)")
    return arr


def check_sample_set(samples, n: int | None = None) -> np.ndarray:
    """Coerce an (m, n) spin matrix; a single sample becomes shape (1, n)."""
    arr = np.asarray(samples)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise ValidationError(f"samples must be a non-empty (m, n) array, got shape {arr.shape}")
    if not np.all((arr == 1) | (arr == -1)):
        raise ValidationError("samples must contain only +1/-1 entries")
    if n is not None and arr.shape[1] != n:
        raise ValidationError(f"samples have n={arr.shape[1]}, expected {n}")
    return arr.astype(np.int8, copy=False)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


class LabeledGraph:
    """Ground-truth labels plus an undirected simple graph in CSR form.

    ``indices[indptr[i]:indptr[i + 1]]`` are the sorted neighbours of ``i``.
    Arrays are read-only after construction.
    """

    __slots__ = ("labels", "indptr", "indices")

    def __init__(self, labels, indptr, indices, *, check: bool = True):
        labels = np.asarray(labels, dtype=np.int8)
        indptr = np.asarray(indptr, dtype=np.int64)
        indices = np.asarray(indices, dtype=np.int32)
        if check:
            _check_csr(labels, indptr, indices)
        self.labels = _frozen(labels)
        self.indptr = _frozen(indptr)
        self.indices = _frozen(indices)

    @classmethod
    def from_edges(cls, labels, edges) -> LabeledGraph:
        """Build from an iterable/array of (i, j) pairs; order and direction are ignored."""
        labels = check_spins(labels, name="labels")
        n = labels.shape[0]
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size:
            if edges.min() < 0 or edges.max() >= n:
                raise ValidationError("edge endpoint out of range")
            if np.any(edges[:, 0] == edges[:, 1]):
                raise ValidationError("self-loops are not allowed")
        lo = np.minimum(edges[:, 0], edges[:, 1])
        hi = np.maximum(edges[:, 0], edges[:, 1])
        keys = np.unique(lo * n + hi)
        if keys.shape[0] != edges.shape[0]:
            raise ValidationError("duplicate edges are not allowed")
        lo, hi = keys // n, keys % n
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return cls(labels, indptr, dst, check=False)

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    @property
    def n_edges(self) -> int:
        return self.indices.shape[0] // 2

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def edges(self) -> np.ndarray:
        """(|E|, 2) array of edges with i < j, in lexicographic order."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        mask = src < self.indices
        return np.column_stack([src[mask], self.indices[mask].astype(np.int64)])

    def adjacency_matrix(self) -> np.ndarray:
        adj = np.zeros((self.n, self.n), dtype=bool)
        e = self.edges()
        adj[e[:, 0], e[:, 1]] = True
        adj[e[:, 1], e[:, 0]] = True
        return adj

    def __eq__(self, other):
        if not isinstance(other, LabeledGraph):
            return NotImplemented
        return (
            np.array_equal(self.labels, other.labels)
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    def __repr__(self):
        return f"LabeledGraph(n={self.n}, n_edges={self.n_edges})"


def _check_csr(labels, indptr, indices):
    check_partition(labels)
    n = labels.shape[0]
    if indptr.shape != (n + 1,) or indptr[0] != 0 or indptr[-1] != indices.shape[0]:
        raise ValidationError("malformed indptr")
    if np.any(np.diff(indptr) < 0):
        raise ValidationError("malformed indptr")
    if indices.size and (indices.min() < 0 or indices.max() >= n):
        raise ValidationError("neighbour index out of range")
    src = np.repeat(np.arange(n), np.diff(indptr))
    if np.any(src == indices):
        raise ValidationError("self-loops are not allowed")
    keys = src.astype(np.int64) * n + indices
    if np.any(np.diff(keys) <= 0):
        raise ValidationError("neighbour lists must be strictly increasing")
    rev = np.sort(indices.astype(np.int64) * n + src)
    if not np.array_equal(rev, keys):
        raise ValidationError("adjacency is not symmetric")


# -- text formats ---------------------------------------------------------


def format_spins(sigma) -> str:
    return " ".join("1" if s > 0 else "-1" for s in np.asarray(sigma))


def _parse_spins(tokens, lineno):
    try:
        values = [int(t) for t in tokens]
    except ValueError as exc:
        raise ValidationError(f"line {lineno}: non-integer spin token") from exc
    if any(v not in (1, -1) for v in values):
        raise ValidationError(f"line {lineno}: spins must be +1 or -1")
    return values


def write_graph(graph: LabeledGraph, path) -> None:
    lines = [f"n {graph.n}", "labels " + format_spins(graph.labels)]
    lines.extend(f"edge {i} {j}" for i, j in graph.edges())
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("ascii"))


def read_graph(path) -> LabeledGraph:
    text = Path(path).read_bytes().decode("ascii")
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if len(lines) < 2:
        raise ValidationError("graph file needs 'n' and 'labels' lines")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "n":
        raise ValidationError("line 1: expected 'n <int>'")
    n = int(head[1])
    tok = lines[1].split()
    if not tok or tok[0] != "labels" or len(tok) != n + 1:
        raise ValidationError(f"line 2: expected 'labels' followed by {n} spins")
    labels = _parse_spins(tok[1:], 2)
    edges = []
    for lineno, line in enumerate(lines[2:], start=3):
        tok = line.split()
        if len(tok) != 3 or tok[0] != "edge":
            raise ValidationError(f"line {lineno}: expected 'edge <i> <j>'")
        i, j = int(tok[1]), int(tok[2])
        if not i < j:
            raise ValidationError(f"line {lineno}: edges must satisfy i < j")
        edges.append((i, j))
    graph = LabeledGraph.from_edges(labels, edges)
    check_partition(graph.labels)
    return graph


def write_samples(samples, path) -> None:
    samples = check_sample_set(samples)
    body = "\n".join(format_spins(row) for row in samples) + "\n"
    Path(path).write_bytes(body.encode("ascii"))


def read_samples(path) -> np.ndarray:
    text = Path(path).read_bytes().decode("ascii")
    rows = [
        _parse_spins(line.split(), k)
        for k, line in enumerate(text.split("\n"), start=1)
        if line.strip()
    ]
    if not rows:
        raise ValidationError("sample file is empty")
    if len({len(r) for r in rows}) != 1:
        raise ValidationError("all samples must share a common n")
    return np.array(rows, dtype=np.int8)
