"""Learning-curve decay regimes for kernel ridge regression under Gaussian design."""

__version__ = "0.1.0"

from .dataspec import (
    CapacitySourceEstimate,
    FeatureDecomposition,
    KernelSpec,
    cumulative_tails,
    estimate_alpha_r,
    feature_decomposition,
    gram_matrix,
    ingest_binary_labels,
)
from .regimes import (
    CrossoverLines,
    OptimalDecay,
    PhaseDiagram,
    Region,
    RegimeLabel,
    RegimeQuery,
    classify,
    noise_crossover_n,
    optimal_decay,
    phase_diagram,
    regularization_crossover_n,
)
from .simulator import (
    LamSchedule,
    LearningCurve,
    SimConfig,
    excess_error_empirical,
    fit_decay_exponent,
    fit_loglog_slope,
    grid_search_lambda,
    learning_curve,
    ridge_fit,
    sample_dataset,
)
from .spectrum import (
    PowerLawParams,
    SourceCapacityReport,
    Spectrum,
    check_source_capacity,
    power_law_spectrum,
    teacher_variance,
)
from .theory import (
    ErrorDecomposition,
    FixedPointState,
    ZSolution,
    excess_error_closed,
    optimal_lambda,
    solve_fixed_point,
    solve_z,
)

__all__ = [
    "CapacitySourceEstimate",
    "CrossoverLines",
    "ErrorDecomposition",
    "FeatureDecomposition",
    "FixedPointState",
    "KernelSpec",
    "LamSchedule",
    "LearningCurve",
    "OptimalDecay",
    "PhaseDiagram",
    "PowerLawParams",
    "Region",
    "RegimeLabel",
    "RegimeQuery",
    "SimConfig",
    "SourceCapacityReport",
    "Spectrum",
    "ZSolution",
    "check_source_capacity",
    "classify",
    "cumulative_tails",
    "estimate_alpha_r",
    "excess_error_closed",
    "excess_error_empirical",
    "feature_decomposition",
    "fit_decay_exponent",
    "fit_loglog_slope",
    "gram_matrix",
    "grid_search_lambda",
    "ingest_binary_labels",
    "learning_curve",
    "noise_crossover_n",
    "optimal_decay",
    "optimal_lambda",
    "phase_diagram",
    "power_law_spectrum",
    "regularization_crossover_n",
    "ridge_fit",
    "sample_dataset",
    "solve_fixed_point",
    "solve_z",
    "teacher_variance",
]
