"""Modified Ising measure on a fixed graph.

The unnormalised log weight of a configuration is

    beta * sum_{edges} s_i s_j  -  (alpha ln n / n) * sum_{non-edges} s_i s_j

Small graphs (n <= ``ENUMERATION_CUTOFF``) are handled exactly by enumerating
all 2^n configurations; larger graphs are sampled with single-site Glauber
(heat-bath) dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.special import logsumexp

from .model import LabeledGraph, SibmParams, ValidationError, check_spins, validate_params
from .utils import as_generator

__all__ = [
    "ENUMERATION_CUTOFF",
    "GibbsTable",
    "McmcSchedule",
    "GlauberChain",
    "log_weight",
    "enumerate_gibbs",
    "exact_sample",
    "glauber_sweep",
    "local_field",
    "sample_set_mcmc",
    "sample_independent",
    "sample_set_exact",
    "sample_chain",
    "configs_from_indices",
    "config_index",
]

ENUMERATION_CUTOFF = 20

# random numbers are drawn in blocks of this many site updates
_CHUNK = 1 << 18


def _repulsion(n: int, alpha: float) -> float:
    return alpha * math.log(n) / n


def log_weight(graph: LabeledGraph, sigma, alpha: float, beta: float) -> float:
    """Unnormalised log probability of ``sigma``, in O(|E| + n)."""
    s = check_spins(sigma, graph.n).astype(np.int64)
    n = graph.n
    e = graph.edges()
    edge_sum = int(np.dot(s[e[:, 0]], s[e[:, 1]])) if e.size else 0
    total = int(s.sum())
    non_edge_sum = (total * total - n) // 2 - edge_sum
    return beta * edge_sum - _repulsion(n, alpha) * non_edge_sum


# -- exact enumeration ----------------------------------------------------


def configs_from_indices(idx, n: int) -> np.ndarray:
    """Spin rows for configuration indices; bit i set means s_i = +1."""
    idx = np.asarray(idx, dtype=np.int64)
    bits = (idx[..., None] >> np.arange(n, dtype=np.int64)) & 1
    return (2 * bits - 1).astype(np.int8)


def config_index(sigma) -> np.ndarray | int:
    """Inverse of :func:`configs_from_indices`; accepts one sample or an (m, n) array."""
    s = np.asarray(sigma)
    weights = np.int64(1) << np.arange(s.shape[-1], dtype=np.int64)
    out = ((s > 0).astype(np.int64) * weights).sum(axis=-1)
    return int(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class GibbsTable:
    """Log weights of all 2^n configurations and the log partition function."""

    n: int
    log_weights: np.ndarray
    log_z: float

    @property
    def log_probs(self) -> np.ndarray:
        return self.log_weights - self.log_z

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self.log_probs)

    def prob(self, sigma) -> float:
        return float(np.exp(self.log_weights[config_index(sigma)] - self.log_z))


def enumerate_gibbs(
    graph: LabeledGraph, alpha: float, beta: float, cutoff: int = ENUMERATION_CUTOFF
) -> GibbsTable:
    n = graph.n
    if n > cutoff:
        raise ValidationError(f"n={n} exceeds the exact-enumeration cutoff {cutoff}")
    adj = graph.adjacency_matrix().astype(np.float64)
    rep = _repulsion(n, alpha)
    size = 1 << n
    log_w = np.empty(size, dtype=np.float64)
    step = 1 << 16
    for start in range(0, size, step):
        idx = np.arange(start, min(start + step, size))
        s = configs_from_indices(idx, n).astype(np.float64)
        edge_sum = np.einsum("ki,ki->k", s @ adj, s) / 2.0
        total = s.sum(axis=1)
        non_edge_sum = (total * total - n) / 2.0 - edge_sum
        log_w[start:start + idx.size] = beta * edge_sum - rep * non_edge_sum
    log_w.flags.writeable = False
    return GibbsTable(n=n, log_weights=log_w, log_z=float(logsumexp(log_w)))


def exact_sample(table: GibbsTable, rng=None, size: int | None = None) -> np.ndarray:
    """Inverse-CDF draw(s) from the normalised table.

    Returns one spin vector, or an (size, n) array when ``size`` is given.
    """
    rng = as_generator(rng)
    idx = exact_sample_indices(table, rng, 1 if size is None else size)
    out = configs_from_indices(idx, table.n)
    return out[0] if size is None else out


def exact_sample_indices(table: GibbsTable, rng, size: int) -> np.ndarray:
    cdf = np.cumsum(table.probs)
    u = as_generator(rng).random(size) * cdf[-1]
    return np.minimum(np.searchsorted(cdf, u, side="right"), cdf.shape[0] - 1)


def sample_set_exact(graph: LabeledGraph, params: SibmParams, rng=None) -> np.ndarray:
    """m independent exact samples; requires n within the enumeration cutoff."""
    table = enumerate_gibbs(graph, params.alpha, params.beta)
    return exact_sample(table, rng, size=params.m)


# -- Glauber dynamics -----------------------------------------------------


@njit(cache=True)
def _field(indptr, indices, state, i, total, beta, rep):
    ns = 0
    for t in range(indptr[i], indptr[i + 1]):
        ns += state[indices[t]]
    return beta * ns - rep * (total - state[i] - ns)


@njit(cache=True)
def _neighbour_sums(indptr, indices, state):
    n = state.shape[0]
    out = np.zeros(n, dtype=np.int64)
    for i in range(n):
        acc = 0
        for t in range(indptr[i], indptr[i + 1]):
            acc += state[indices[t]]
        out[i] = acc
    return out


@njit(cache=True)
def _glauber_updates(indptr, indices, state, nbr_sum, total, beta, rep, sites, uniforms):
    # nbr_sum[i] caches sum_{j in N(i)} s_j and is patched only when a spin flips
    for k in range(sites.shape[0]):
        i = sites[k]
        ns = nbr_sum[i]
        h = beta * ns - rep * (total - state[i] - ns)
        p_plus = 1.0 / (1.0 + math.exp(-2.0 * h))
        new = 1 if uniforms[k] < p_plus else -1
        if new != state[i]:
            state[i] = new
            d = 2 * new
            total += d
            for t in range(indptr[i], indptr[i + 1]):
                nbr_sum[indices[t]] += d
    return total


@njit(cache=True)
def _glauber_record(indptr, indices, state, nbr_sum, total, beta, rep, sites, uniforms,
                    stride, out):
    n = state.shape[0]
    for r in range(out.shape[0]):
        total = _glauber_updates(
            indptr, indices, state, nbr_sum, total, beta, rep,
            sites[r * stride:(r + 1) * stride], uniforms[r * stride:(r + 1) * stride],
        )
        for i in range(n):
            out[r, i] = state[i]
    return total


def local_field(graph: LabeledGraph, alpha: float, beta: float, sigma, i: int) -> float:
    """h_i such that P(s_i = +1 | rest) = 1 / (1 + exp(-2 h_i))."""
    s = check_spins(sigma, graph.n).astype(np.int64)
    return float(
        _field(graph.indptr, graph.indices, s, int(i), int(s.sum()), float(beta),
               _repulsion(graph.n, alpha))
    )


class GlauberChain:
    """A single heat-bath chain on ``graph``; mutates ``state`` in place."""

    def __init__(self, graph: LabeledGraph, alpha: float, beta: float, state=None, rng=None):
        self.graph = graph
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.rng = as_generator(rng)
        n = graph.n
        if state is None:
            state = self.rng.choice(np.array([-1, 1], dtype=np.int64), size=n)
        else:
            state = check_spins(state, n)
        self.state = np.ascontiguousarray(state, dtype=np.int64)
        self._rep = _repulsion(n, alpha)
        self._nbr_sum = _neighbour_sums(graph.indptr, graph.indices, self.state)
        self._total = int(self.state.sum())

    def updates(self, count: int, scale: float = 1.0) -> None:
        """``count`` random-site updates of the measure with log weight multiplied by ``scale``."""
        n = self.graph.n
        remaining = int(count)
        while remaining > 0:
            k = min(remaining, _CHUNK)
            sites = self.rng.integers(0, n, size=k)
            uniforms = self.rng.random(k)
            self._total = _glauber_updates(
                self.graph.indptr, self.graph.indices, self.state, self._nbr_sum,
                self._total, scale * self.beta, scale * self._rep, sites, uniforms,
            )
            remaining -= k

    def anneal(self, sweeps: int) -> None:
        """Sweeps with the log weight scaled by k / sweeps, k = 1..sweeps."""
        for k in range(1, int(sweeps) + 1):
            self.updates(self.graph.n, scale=k / sweeps)

    def sweep(self, sweeps: int = 1) -> None:
        """``sweeps`` * n single-site updates at uniformly random sites."""
        self.updates(int(sweeps) * self.graph.n)

    def spins(self) -> np.ndarray:
        return self.state.astype(np.int8)


def glauber_sweep(graph: LabeledGraph, alpha: float, beta: float, state: np.ndarray, rng=None):
    """One sweep (n random-site heat-bath updates), writing back into ``state``."""
    chain = GlauberChain(graph, alpha, beta, state, rng)
    chain.sweep(1)
    state[...] = chain.state.astype(state.dtype)
    return state


@dataclass(frozen=True)
class McmcSchedule:
    """Sweep counts for one chain.

    ``anneal`` sweeps ramp the log weight from near zero up to the target,
    then ``burn_in`` sweeps run at the target. Long single chains record a
    state every ``thinning`` sweeps after that.
    """

    burn_in: int
    thinning: int = 1
    anneal: int = 0

    def __post_init__(self):
        if self.burn_in < 0 or self.anneal < 0 or self.thinning < 1:
            raise ValidationError("burn_in, anneal must be >= 0 and thinning >= 1")

    @property
    def total_sweeps(self) -> int:
        return self.anneal + self.burn_in

    @classmethod
    def default(cls, n: int) -> McmcSchedule:
        # 200 ceil(ln n) sweeps in total, the first half annealed
        half = 100 * math.ceil(math.log(n))
        return cls(burn_in=half, thinning=1, anneal=half)

    def run(self, chain: GlauberChain) -> None:
        chain.anneal(self.anneal)
        chain.sweep(self.burn_in)


def sample_set_mcmc(
    graph: LabeledGraph, params: SibmParams, schedule: McmcSchedule | None = None, rng=None
) -> np.ndarray:
    """(m, n) samples, each the end state of its own hot-started chain.

    Fresh chains make the m samples independent given the graph.
    """
    validate_params(params)
    if params.n != graph.n:
        raise ValidationError(f"params.n={params.n} but graph has n={graph.n}")
    return sample_independent(graph, params.alpha, params.beta, params.m, schedule, rng)


def sample_independent(
    graph: LabeledGraph, alpha: float, beta: float, m: int,
    schedule: McmcSchedule | None = None, rng=None,
) -> np.ndarray:
    schedule = schedule or McmcSchedule.default(graph.n)
    rng = as_generator(rng)
    out = np.empty((m, graph.n), dtype=np.int8)
    for j in range(m):
        chain = GlauberChain(graph, alpha, beta, rng=rng)
        schedule.run(chain)
        out[j] = chain.spins()
    return out


def sample_chain(
    graph: LabeledGraph, alpha: float, beta: float, n_samples: int,
    schedule: McmcSchedule, rng=None,
) -> np.ndarray:
    """One long chain: burn in, then record the state every ``thinning`` sweeps."""
    chain = GlauberChain(graph, alpha, beta, rng=rng)
    schedule.run(chain)
    n = graph.n
    stride = schedule.thinning * n
    per_chunk = max(1, _CHUNK // stride)
    out = np.empty((n_samples, n), dtype=np.int8)
    done = 0
    while done < n_samples:
        k = min(per_chunk, n_samples - done)
        sites = chain.rng.integers(0, n, size=k * stride)
        uniforms = chain.rng.random(k * stride)
        chain._total = _glauber_record(
            graph.indptr, graph.indices, chain.state, chain._nbr_sum, chain._total,
            chain.beta, chain._rep, sites, uniforms, stride, out[done:done + k],
        )
        done += k
    return out
