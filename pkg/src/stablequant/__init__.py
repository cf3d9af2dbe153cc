"""Quantile-based estimation for elliptical stable distributions."""

__version__ = "0.1.0"

from .directions import DirectionSet, build_direction_set, optimal_pair_direction
from .errors import (
    DegenerateInputError,
    DomainError,
    InsufficientConditioningError,
    NotPositiveDefiniteError,
    NumericError,
    RankDeficiencyError,
)
from .estimation import (
    EstimationResult,
    MmsqConfig,
    OptimizerSettings,
    asymptotic_cov,
    estimate,
    natural_vector,
    objective,
    pack_theta,
    parameter_names,
    simulate_phi,
    simulation_inflation,
    unpack_theta,
)
from .metrics import (
    Design,
    ReplicationSummary,
    coverage_table,
    design_names,
    f1_score,
    frobenius_error,
    get_design,
    kl_divergence,
    metric_table,
    run_experiment,
)
from .quantiles import (
    EtaMatrix,
    PhiVector,
    TauGrid,
    empirical_quantile,
    eta_matrix,
    omega_phi,
    phi_jacobian,
    phi_stats,
    projected_quantiles,
    projectional_quantile,
    sparsity_at,
)
from .risk import (
    PortfolioModel,
    RiskConfig,
    RiskNetwork,
    build_network,
    dominance_test,
    netcovar,
    network_to_dot,
    read_returns_panel,
    var_individual,
)
from .sparse import (
    ScadParams,
    SparseResult,
    default_lambda_grid,
    lqa_epsilon,
    oracle_covariance,
    penalty_majorizer,
    perturbed_penalty,
    scad_derivative,
    scad_penalty,
    sparse_estimate,
    tune_lambda,
)
from .stable import (
    EsdParams,
    RngStream,
    StableParams,
    char_fn,
    init_esd,
    mcculloch_init,
    sample_esd,
    sample_positive_stable,
)

__all__ = [
    "__version__",
    "DomainError",
    "DegenerateInputError",
    "NotPositiveDefiniteError",
    "NumericError",
    "RankDeficiencyError",
    "InsufficientConditioningError",
    "RngStream",
    "StableParams",
    "EsdParams",
    "sample_positive_stable",
    "sample_esd",
    "char_fn",
    "mcculloch_init",
    "init_esd",
    "DirectionSet",
    "build_direction_set",
    "optimal_pair_direction",
    "TauGrid",
    "PhiVector",
    "EtaMatrix",
    "empirical_quantile",
    "projectional_quantile",
    "projected_quantiles",
    "phi_stats",
    "phi_jacobian",
    "sparsity_at",
    "eta_matrix",
    "omega_phi",
    "MmsqConfig",
    "OptimizerSettings",
    "EstimationResult",
    "parameter_names",
    "natural_vector",
    "pack_theta",
    "unpack_theta",
    "simulate_phi",
    "objective",
    "estimate",
    "asymptotic_cov",
    "simulation_inflation",
    "ScadParams",
    "SparseResult",
    "scad_penalty",
    "scad_derivative",
    "perturbed_penalty",
    "penalty_majorizer",
    "lqa_epsilon",
    "sparse_estimate",
    "tune_lambda",
    "default_lambda_grid",
    "oracle_covariance",
    "Design",
    "ReplicationSummary",
    "f1_score",
    "kl_divergence",
    "frobenius_error",
    "run_experiment",
    "get_design",
    "design_names",
    "coverage_table",
    "metric_table",
    "RiskConfig",
    "PortfolioModel",
    "RiskNetwork",
    "var_individual",
    "netcovar",
    "dominance_test",
    "build_network",
    "network_to_dot",
    "read_returns_panel",
]
