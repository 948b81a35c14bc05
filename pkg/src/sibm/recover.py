"""Recovering the hidden partition from spin samples."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.special import logsumexp
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .ising import config_index, configs_from_indices
from .model import SibmParams, ValidationError, check_sample_set, check_spins
from .utils import as_generator

__all__ = [
    "LearnSIBM",
    "learn_sibm",
    "recovery_success",
    "Posterior",
    "exact_posterior",
    "balanced_partitions",
    "indistinguishable_pairs",
    "POSTERIOR_CUTOFF",
]

POSTERIOR_CUTOFF = 6


def _alignment_signs(samples: np.ndarray) -> np.ndarray:
    ref = samples[0].astype(np.int64)
    inner = samples.astype(np.int64) @ ref
    # orthogonal samples align on the first coordinate so a flip of ref flips them too
    fallback = samples[:, 0].astype(np.int64) * ref[0]
    return np.where(inner == 0, fallback, np.sign(inner)).astype(np.int64)


def learn_sibm(samples, rng=None) -> np.ndarray:
    """Align every sample with the first, then take a coordinate-wise majority.

    A zero vote gets a fair random sign, drawn relative to the first sample so
    that flipping the first sample flips the whole output.
    """
    samples = check_sample_set(samples)
    signs = _alignment_signs(samples)
    votes = signs @ samples.astype(np.int64)
    out = np.sign(votes).astype(np.int8)
    ties = np.flatnonzero(votes == 0)
    if ties.size:
        coin = as_generator(rng).integers(0, 2, size=ties.size, dtype=np.int8) * 2 - 1
        out[ties] = coin * samples[0, ties]
    return out


class LearnSIBM(BaseEstimator):
    """Parameter-free O(n m) partition recovery from Ising samples.

    ``X`` is an (m, n) matrix whose rows are spin samples over the same n
    vertices; the fitted ``labels_`` has one entry per vertex (column).

    Parameters
    ----------
    random_state : int, Generator or None
        Source of the fair coin used for tied majority votes.
    """

    def __init__(self, random_state=None):
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_sample_set(X)
        self.n_features_in_ = X.shape[1]
        self.signs_ = _alignment_signs(X)
        self.votes_ = self.signs_ @ X.astype(np.int64)
        self.labels_ = learn_sibm(X, self.random_state)
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_

    def transform(self, X):
        """Flip each row of X to agree in sign with the fitted labels."""
        check_is_fitted(self, "labels_")
        X = check_sample_set(X, self.n_features_in_)
        inner = X.astype(np.int64) @ self.labels_.astype(np.int64)
        return (X * np.where(inner < 0, -1, 1)[:, None]).astype(np.int8)

    def score(self, X, y):
        """1.0 if fitting on X recovers y up to a global sign, else 0.0."""
        return float(recovery_success(self.fit(X).labels_, y))


def recovery_success(x_hat, x) -> bool:
    """True iff x_hat equals x or -x exactly."""
    x_hat = check_spins(x_hat, name="x_hat")
    x = check_spins(x, x_hat.shape[0], name="x")
    return bool(np.array_equal(x_hat, x) or np.array_equal(x_hat, -x))


# -- exact posterior at toy scale ----------------------------------------


def balanced_partitions(n: int) -> np.ndarray:
    """All C(n, n/2) balanced labellings, lexicographic in the +1 positions."""
    rows = []
    for plus in combinations(range(n), n // 2):
        row = -np.ones(n, dtype=np.int8)
        row[list(plus)] = 1
        rows.append(row)
    return np.array(rows, dtype=np.int8)


@dataclass(frozen=True)
class Posterior:
    partitions: np.ndarray
    log_probs: np.ndarray

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self.log_probs)

    def prob(self, x) -> float:
        x = np.asarray(x)
        hit = np.flatnonzero(np.all(self.partitions == x, axis=1))
        if not hit.size:
            raise ValidationError("not a balanced partition of the right length")
        return float(np.exp(self.log_probs[hit[0]]))

    def map_estimate(self) -> np.ndarray:
        return self.partitions[int(np.argmax(self.log_probs))]


def _safe_log(p: float) -> float:
    return math.log(p) if p > 0 else -math.inf


def exact_posterior(
    samples, params: SibmParams, p: float | None = None, q: float | None = None
) -> Posterior:
    """P(X = x | samples) over every balanced x, by summing over all graphs.

    ``p``/``q`` override a ln n / n and b ln n / n; useful at toy n where those
    rates exceed 1. Everything else (alpha, beta, and n in the repulsion) comes
    from ``params``.
    """
    n = params.n
    if n > POSTERIOR_CUTOFF or n < 2 or n % 2:
        raise ValidationError(f"exact posterior needs even n <= {POSTERIOR_CUTOFF}, got {n}")
    samples = check_sample_set(samples, n)
    p = params.p if p is None else p
    q = params.q if q is None else q
    if not (0 <= p <= 1 and 0 <= q <= 1):
        raise ValidationError(f"edge probabilities must lie in [0, 1], got p={p}, q={q}")

    pairs = np.array(list(combinations(range(n), 2)), dtype=np.int64)
    n_pairs = pairs.shape[0]
    graphs = np.arange(1 << n_pairs, dtype=np.int64)
    bits = ((graphs[:, None] >> np.arange(n_pairs)) & 1).astype(np.float64)

    configs = configs_from_indices(np.arange(1 << n), n).astype(np.float64)
    pair_prod = configs[:, pairs[:, 0]] * configs[:, pairs[:, 1]]
    edge_sum = pair_prod @ bits.T
    pair_total = pair_prod.sum(axis=1)[:, None]
    log_w = params.beta * edge_sum - params.repulsion * (pair_total - edge_sum)
    log_z = logsumexp(log_w, axis=0)
    idx = config_index(samples)
    log_lik = log_w[idx].sum(axis=0) - samples.shape[0] * log_z

    parts = balanced_partitions(n)
    same = (parts[:, pairs[:, 0]] == parts[:, pairs[:, 1]])
    log_on = np.where(same, _safe_log(p), _safe_log(q))
    log_off = np.where(same, _safe_log(1 - p), _safe_log(1 - q))
    impossible = bits @ np.isinf(log_on).T + (1 - bits) @ np.isinf(log_off).T
    log_prior_g = bits @ np.where(np.isinf(log_on), 0, log_on).T
    log_prior_g += (1 - bits) @ np.where(np.isinf(log_off), 0, log_off).T
    log_prior_g[impossible > 0] = -np.inf

    log_joint = logsumexp(log_prior_g + log_lik[:, None], axis=0)
    return Posterior(partitions=parts, log_probs=log_joint - logsumexp(log_joint))


def indistinguishable_pairs(samples, x) -> list[tuple[int, int]]:
    """Pairs (i, j), i < j, with identical sample columns and opposite labels."""
    samples = check_sample_set(samples)
    x = check_spins(x, samples.shape[1], name="x")
    groups: dict[bytes, list[int]] = {}
    for i, col in enumerate(np.ascontiguousarray(samples.T)):
        groups.setdefault(col.tobytes(), []).append(i)
    out = []
    for members in groups.values():
        for i, j in combinations(members, 2):
            if x[i] != x[j]:
                out.append((i, j))
    return sorted(out)
