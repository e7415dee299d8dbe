"""Correlated-error quantum memory workbench.

Simulates error-corrected memories whose per-epoch errors are driven by a
hidden one-dimensional Markov field, including an adversarial threshold
family with long-range correlations, and checks the analytic concentration
ceilings that govern memory lifetime against exact enumeration and Monte
Carlo at desk scale.
"""

__version__ = "0.1.0"

from .errors import EnumerationLimitError, ResourceLimitError, ValidationError
from .rng import derive_seed, make_generator
from .field import (
    ENUM_LIMIT,
    MarkovFieldSpec,
    MixingProfile,
    all_sequences,
    correlation_decay_profile,
    exact_field_distribution,
    mixing_bound,
    mixing_coefficients,
    mixing_profile,
    sample_field,
    sample_field_batch,
    site_marginals,
)
from .channel import (
    CovarianceEstimate,
    GlobalThresholdChannel,
    HiddenErrorModel,
    MonteCarloScalar,
    PerSiteChannel,
    WindowChannel,
    conditional_weight_table,
    covariance_matrix,
    error_rate,
    exact_error_distribution,
    expected_errors,
    lipschitz_constant,
    sample_errors,
    sample_errors_batch,
    site_error_rates,
)
from .adversarial import (
    CovarianceDecomposition,
    MarginalErrorRate,
    ReducedSumTails,
    TailScalingFit,
    ThresholdModelSpec,
    as_hidden_model,
    covariance_decomposition,
    exact_covariance,
    marginal_error_rate,
    reduced_sum_tails,
    retention_upper_bound,
    sample_threshold_errors,
    sample_threshold_errors_batch,
    tail_scaling_fit,
    threshold_lipschitz,
    trigger_probability,
)
from .memory import (
    CodeModel,
    FailureEstimate,
    LifetimeBound,
    RetentionEstimate,
    ScalingPoint,
    ScalingResult,
    epoch_step,
    geometric_ks_statistic,
    ks_critical_value,
    lifetime_lower_bound,
    per_epoch_failure_prob,
    scaling_experiment,
    simulate_retention,
    weight_law,
)
from .bounds import (
    TailEstimate,
    TailReport,
    chain_rate_constant,
    chain_tail_bound,
    clopper_pearson,
    combined_tail_bound,
    empirical_tail,
    exact_tail,
    hoeffding_conditional_bound,
    verify_bound,
)
from .harness import (
    ConfigError,
    ExperimentConfig,
    RunResult,
    bundled_verification_suite,
    load_config,
    parse_config,
    run,
    symmetric_binary_field,
)

__all__ = [
    "ENUM_LIMIT",
    "CodeModel",
    "ConfigError",
    "CovarianceDecomposition",
    "CovarianceEstimate",
    "EnumerationLimitError",
    "ExperimentConfig",
    "FailureEstimate",
    "GlobalThresholdChannel",
    "HiddenErrorModel",
    "LifetimeBound",
    "MarginalErrorRate",
    "MarkovFieldSpec",
    "MixingProfile",
    "MonteCarloScalar",
    "PerSiteChannel",
    "ReducedSumTails",
    "ResourceLimitError",
    "RetentionEstimate",
    "RunResult",
    "ScalingPoint",
    "ScalingResult",
    "TailEstimate",
    "TailReport",
    "TailScalingFit",
    "ThresholdModelSpec",
    "ValidationError",
    "WindowChannel",
    "all_sequences",
    "as_hidden_model",
    "bundled_verification_suite",
    "chain_rate_constant",
    "chain_tail_bound",
    "clopper_pearson",
    "combined_tail_bound",
    "conditional_weight_table",
    "correlation_decay_profile",
    "covariance_decomposition",
    "covariance_matrix",
    "derive_seed",
    "empirical_tail",
    "epoch_step",
    "error_rate",
    "exact_covariance",
    "exact_error_distribution",
    "exact_field_distribution",
    "exact_tail",
    "expected_errors",
    "geometric_ks_statistic",
    "hoeffding_conditional_bound",
    "ks_critical_value",
    "lifetime_lower_bound",
    "lipschitz_constant",
    "load_config",
    "make_generator",
    "marginal_error_rate",
    "mixing_bound",
    "mixing_coefficients",
    "mixing_profile",
    "parse_config",
    "per_epoch_failure_prob",
    "reduced_sum_tails",
    "retention_upper_bound",
    "run",
    "sample_errors",
    "sample_errors_batch",
    "sample_field",
    "sample_field_batch",
    "sample_threshold_errors",
    "sample_threshold_errors_batch",
    "scaling_experiment",
    "simulate_retention",
    "site_error_rates",
    "site_marginals",
    "symmetric_binary_field",
    "tail_scaling_fit",
    "threshold_lipschitz",
    "trigger_probability",
    "verify_bound",
    "weight_law",
]
