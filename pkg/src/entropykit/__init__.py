"""entropykit: nearest-neighbor differential entropy estimation.

A numpy/scipy library built around the first-nearest-neighbor entropy
estimate, with oracle distributions (exact samplers, entropies, CDFs and
ball masses), proof-level diagnostics that check the estimate's exact
decomposition and distribution-free laws, and a reproducible Monte Carlo
experiment runner covering convergence, heavy-tail, and blowup regimes.
"""

__version__ = "0.1.0"

from .diagnostics import (
    DiagnosticsReport,
    ball_mass_sum,
    diagnose,
    empirical_log_tail,
    ks_critical_value,
    ks_one_sample,
    ks_two_sample,
    ks_two_sample_critical_value,
    m_statistic,
    tilde_h,
    uniform_ball_mass_check,
)
from .distributions import (
    BallMassPrecision,
    Cauchy,
    Counterexample,
    CounterexampleDraw,
    DistributionSpec,
    Exponential,
    IsotropicGaussian,
    UniformCube,
    ball_mass,
    exact_entropy,
    exact_log_tail_moment,
    sample,
    spec_from_config,
    spec_to_config,
)
from .errors import (
    ConfigError,
    CsvFormatError,
    DimensionMismatch,
    DuplicatePoints,
    EmptyInput,
    EntropyKitError,
    InvalidDimension,
    PrecisionUnachievable,
    SampleTooSmall,
)
from .estimators import (
    EULER_MASCHERONI,
    EntropyEstimate,
    OneNnDensity,
    ell_statistic,
    kl_entropy,
    kl_entropy_logdomain,
    one_nn_density,
    unit_ball_volume,
)
from .experiments import (
    ExperimentConfig,
    ResultRow,
    SummaryRow,
    config_from_dict,
    config_to_dict,
    read_rows,
    run_and_persist,
    run_convergence,
    run_divergence,
    run_experiment,
    summarize,
    write_rows,
)
from .nn import (
    DEFAULT_CLAMP_J,
    LogPoint,
    NnDistances,
    PointSample,
    as_sample,
    log_nn_distances_1d,
    nn_distances,
)
from .seeding import as_generator, derive_rng, mix64

__all__ = [
    "BallMassPrecision",
    "Cauchy",
    "ConfigError",
    "Counterexample",
    "CounterexampleDraw",
    "CsvFormatError",
    "DEFAULT_CLAMP_J",
    "DiagnosticsReport",
    "DimensionMismatch",
    "DistributionSpec",
    "DuplicatePoints",
    "EULER_MASCHERONI",
    "EmptyInput",
    "EntropyEstimate",
    "EntropyKitError",
    "ExperimentConfig",
    "Exponential",
    "InvalidDimension",
    "IsotropicGaussian",
    "LogPoint",
    "NnDistances",
    "OneNnDensity",
    "PointSample",
    "PrecisionUnachievable",
    "ResultRow",
    "SampleTooSmall",
    "SummaryRow",
    "UniformCube",
    "as_generator",
    "as_sample",
    "ball_mass",
    "ball_mass_sum",
    "config_from_dict",
    "config_to_dict",
    "derive_rng",
    "diagnose",
    "ell_statistic",
    "empirical_log_tail",
    "exact_entropy",
    "exact_log_tail_moment",
    "kl_entropy",
    "kl_entropy_logdomain",
    "ks_critical_value",
    "ks_one_sample",
    "ks_two_sample",
    "ks_two_sample_critical_value",
    "log_nn_distances_1d",
    "m_statistic",
    "mix64",
    "nn_distances",
    "one_nn_density",
    "read_rows",
    "run_and_persist",
    "run_convergence",
    "run_divergence",
    "run_experiment",
    "sample",
    "spec_from_config",
    "spec_to_config",
    "summarize",
    "tilde_h",
    "uniform_ball_mass_check",
    "unit_ball_volume",
    "write_rows",
]
