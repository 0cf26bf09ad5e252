"""Bayes-factor false discovery rate control.

Estimate the proportion of true nulls conservatively from Bayes factors
(EBF prefix-mean scan or QBF quantile census), turn Bayes factors into
conservative posterior probabilities, and reject at a target Bayesian
FDR, alongside the classical p-value baselines, a permutation engine for
gene-level statistics, and two synthetic study generators.
"""
from .bayes_factor import (
    DEFAULT_OMEGA_GRID,
    OmegaGrid,
    bf_averaged,
    bf_cox,
    bf_from_regression,
    bf_gene,
    bf_null_quantile,
    bf_null_quantiles,
    gene_log_bf,
    log_bf_averaged,
    log_bf_cox,
    log_bf_gene,
)
from .fdr_control import (
    PvalueDecision,
    apply_auto_reject,
    bfdr_decide,
    bh_decide,
    posterior_table,
    storey_decide,
    two_sided_normal_p,
)
from .model import (
    DecisionReport,
    EvalReport,
    Pi0Estimate,
    Pi0Method,
    PosteriorTable,
    SimTruth,
    TestRecord,
    ValidationError,
    validate_records,
)
from .permutation import (
    PermutationPlan,
    Statistic,
    empirical_quantile,
    min_p_statistic,
    permutation_pvalue,
    permute_null_quantile,
)
from .pi0_estimation import auto_reject_threshold, ebf_pi0, fixed_pi0, qbf_pi0, storey_pi0
from .simulation import GeneData, SimIConfig, SimIIConfig, score, simulate_I, simulate_II

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_OMEGA_GRID",
    "OmegaGrid",
    "bf_averaged",
    "bf_cox",
    "bf_from_regression",
    "bf_gene",
    "bf_null_quantile",
    "bf_null_quantiles",
    "gene_log_bf",
    "log_bf_averaged",
    "log_bf_cox",
    "log_bf_gene",
    "PvalueDecision",
    "apply_auto_reject",
    "bfdr_decide",
    "bh_decide",
    "posterior_table",
    "storey_decide",
    "two_sided_normal_p",
    "DecisionReport",
    "EvalReport",
    "Pi0Estimate",
    "Pi0Method",
    "PosteriorTable",
    "SimTruth",
    "TestRecord",
    "ValidationError",
    "validate_records",
    "PermutationPlan",
    "Statistic",
    "empirical_quantile",
    "min_p_statistic",
    "permutation_pvalue",
    "permute_null_quantile",
    "auto_reject_threshold",
    "ebf_pi0",
    "fixed_pi0",
    "qbf_pi0",
    "storey_pi0",
    "GeneData",
    "SimIConfig",
    "SimIIConfig",
    "score",
    "simulate_I",
    "simulate_II",
    "__version__",
]
