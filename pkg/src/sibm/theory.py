"""Closed-form thresholds for exact recovery in the stochastic Ising block model.

All logarithms are natural. With x = exp(2 beta), ``g(beta) = 0`` is the
quadratic ``b x^2 - (a + b - 2) x + a = 0``; its smaller root gives the
critical inverse temperature ``beta_star`` and its larger root ``beta_prime``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum

from scipy.optimize import bisect

from .model import RegimeError, SibmParams, validate_params

__all__ = [
    "AlphaRegime",
    "ThresholdReport",
    "g",
    "g_tilde",
    "f_beta",
    "t_star",
    "beta_star",
    "beta_prime",
    "beta_star_bisect",
    "m_star",
    "recovery_condition",
    "graph_recoverable",
    "threshold_report",
]

# closed forms are unstable when sqrt(a) - sqrt(b) is this close to sqrt(2)
DEGENERATE_TOL = 1e-9
INTEGER_RATIO_RTOL = 1e-9
BISECT_XTOL = 1e-12


class AlphaRegime(str, Enum):
    ABOVE = "above"
    BELOW = "below"
    BOUNDARY = "boundary"


def g(a: float, b: float, beta: float) -> float:
    return (b * math.exp(2 * beta) + a * math.exp(-2 * beta)) / 2 - (a + b) / 2 + 1


def _cutoff_beta(a: float, b: float) -> float:
    """Minimiser of g: 1/4 ln(a/b)."""
    return 0.25 * math.log(a / b)


def g_tilde(a: float, b: float, beta: float) -> float:
    """g frozen at its minimum value for beta >= 1/4 ln(a/b)."""
    if beta < _cutoff_beta(a, b):
        return g(a, b, beta)
    return math.sqrt(a * b) - (a + b) / 2 + 1


def f_beta(a: float, b: float, beta: float, t: float) -> float:
    """Concave exponent maximised at ``t_star`` with maximum ``g(beta)``."""
    r = math.sqrt(t * t + a * b)
    return r - t * (math.log(r + t) - math.log(b)) - (a + b) / 2 + 1 + 2 * beta * t


def t_star(a: float, b: float, beta: float) -> float:
    return (b * math.exp(2 * beta) - a * math.exp(-2 * beta)) / 2


def graph_recoverable(a: float, b: float) -> bool:
    return math.sqrt(a) - math.sqrt(b) >= math.sqrt(2)


def _check_regime(a: float, b: float) -> None:
    if not (a > b > 0):
        raise RegimeError(f"need a > b > 0, got a={a}, b={b}")
    gap = math.sqrt(a) - math.sqrt(b) - math.sqrt(2)
    if abs(gap) <= DEGENERATE_TOL:
        raise RegimeError("sqrt(a) - sqrt(b) is numerically equal to sqrt(2)")
    if gap < 0:
        raise RegimeError(
            f"sqrt(a) - sqrt(b) < sqrt(2) (a={a}, b={b}): g has no real root"
        )


def _roots(a: float, b: float) -> tuple[float, float]:
    _check_regime(a, b)
    s = a + b - 2
    disc = math.sqrt(s * s - 4 * a * b)
    x_big = (s + disc) / (2 * b)
    # product of the roots is a / b; avoids cancellation in s - disc
    x_small = (2 * a) / (s + disc)
    return 0.5 * math.log(x_small), 0.5 * math.log(x_big)


def beta_star(a: float, b: float) -> float:
    return _roots(a, b)[0]


def beta_prime(a: float, b: float) -> float:
    return _roots(a, b)[1]


def beta_star_bisect(a: float, b: float, xtol: float = BISECT_XTOL) -> float:
    """Smaller root of g by bisection on (0, 1/4 ln(a/b)); independent of the closed form."""
    _check_regime(a, b)
    return bisect(lambda x: g(a, b, x), 0.0, _cutoff_beta(a, b), xtol=xtol, maxiter=500)


def m_star(a: float, b: float, beta: float) -> int:
    """2 floor(beta_star / beta) + 1."""
    if beta <= 0:
        raise RegimeError("beta must be positive")
    return 2 * math.floor(beta_star(a, b) / beta) + 1


def recovery_condition(a: float, b: float, beta: float, m: int) -> bool:
    """floor((m + 1) / 2) * beta > beta_star."""
    return ((m + 1) // 2) * beta > beta_star(a, b)


def _ratio_is_integer(ratio: float) -> bool:
    nearest = round(ratio)
    return nearest >= 1 and abs(ratio - nearest) <= INTEGER_RATIO_RTOL * max(1.0, abs(ratio))


def _alpha_regime(alpha: float, b: float, beta: float) -> AlphaRegime:
    if math.isclose(alpha, b * beta, rel_tol=1e-12, abs_tol=0.0):
        return AlphaRegime.BOUNDARY
    return AlphaRegime.ABOVE if alpha > b * beta else AlphaRegime.BELOW


@dataclass(frozen=True)
class ThresholdReport:
    a: float
    b: float
    alpha: float
    beta: float
    m: int
    beta_star: float | None
    beta_prime: float | None
    m_star: int | None
    g_at_beta: float
    g_tilde_at_beta: float
    t_star: float
    graph_recoverable: bool
    degenerate: bool
    alpha_regime: AlphaRegime
    integer_ratio: bool
    open_window: bool
    predicted: str

    def to_dict(self) -> dict:
        d = asdict(self)
        d["alpha_regime"] = self.alpha_regime.value
        return d


def threshold_report(params: SibmParams) -> ThresholdReport:
    """Every threshold quantity for ``params`` plus regime flags.

    ``predicted`` is one of ``"solvable"``, ``"unsolvable"``, ``"open"`` or
    ``"not-applicable"``. With beta_star / beta an integer the asymptotic
    answer for m in {m_star - 2, m_star - 1} is unknown, reported as open.
    """
    validate_params(params)
    a, b, alpha, beta, m = params.a, params.b, params.alpha, params.beta, params.m
    gap = math.sqrt(a) - math.sqrt(b) - math.sqrt(2)
    degenerate = abs(gap) <= DEGENERATE_TOL
    regime = _alpha_regime(alpha, b, beta)
    bs = bp = ms = None
    integer_ratio = open_window = False
    if gap > DEGENERATE_TOL:
        bs, bp = _roots(a, b)
        ms = m_star(a, b, beta)
        integer_ratio = _ratio_is_integer(bs / beta)
        if integer_ratio:
            ms = 2 * round(bs / beta) + 1
            open_window = ms - 2 <= m < ms
    if bs is None or regime is AlphaRegime.BOUNDARY:
        predicted = "not-applicable"
    elif regime is AlphaRegime.BELOW:
        predicted = "unsolvable"
    elif open_window:
        predicted = "open"
    else:
        predicted = "solvable" if m >= ms else "unsolvable"
    return ThresholdReport(
        a=a, b=b, alpha=alpha, beta=beta, m=m,
        beta_star=bs, beta_prime=bp, m_star=ms,
        g_at_beta=g(a, b, beta), g_tilde_at_beta=g_tilde(a, b, beta),
        t_star=t_star(a, b, beta),
        graph_recoverable=graph_recoverable(a, b),
        degenerate=degenerate,
        alpha_regime=regime,
        integer_ratio=integer_ratio,
        open_window=open_window,
        predicted=predicted,
    )
