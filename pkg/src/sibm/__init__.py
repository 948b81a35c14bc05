"""Stochastic Ising block model: generation, sampling, thresholds and recovery."""

from .ising import GibbsTable, GlauberChain, McmcSchedule, enumerate_gibbs, log_weight, sample_set_mcmc
from .model import LabeledGraph, RegimeError, SibmParams, ValidationError, validate_params
from .recover import LearnSIBM, exact_posterior, indistinguishable_pairs, learn_sibm, recovery_success
from .ssbm import generate_ssbm, random_balanced_partition
from .theory import beta_star, g, m_star, threshold_report

__version__ = "0.1.0"

__all__ = [
    "GibbsTable",
    "GlauberChain",
    "LabeledGraph",
    "LearnSIBM",
    "McmcSchedule",
    "RegimeError",
    "SibmParams",
    "ValidationError",
    "beta_star",
    "enumerate_gibbs",
    "exact_posterior",
    "g",
    "generate_ssbm",
    "indistinguishable_pairs",
    "learn_sibm",
    "log_weight",
    "m_star",
    "random_balanced_partition",
    "recovery_success",
    "sample_set_mcmc",
    "threshold_report",
    "validate_params",
]
