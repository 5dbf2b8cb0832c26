"""Causal-model-based time-series simulation.

Fit a temporal structural causal model to an observed multivariate series
(graph discovery, per-variable forecasters, residual noise), simulate new
data from it by ancestral sampling, and score the simulation against the
real series with classifier two-sample tests.
"""

from .datasets import Dataset, load_csv, save_csv
from .discovery import (
    ALGORITHMS,
    CDConfig,
    CDResult,
    acyclicity_h,
    discover,
    dynotears_discover,
    lagged_pc_discover,
    parcorr_ci_test,
)
from .errors import (
    CausimError,
    ConvergenceError,
    CsvParseError,
    DataSizeError,
    DegenerateInputError,
    NumericInstabilityError,
    PhaseError,
)
from .evaluation import (
    C2STSplit,
    DetectionResult,
    DetectorConfig,
    MMDConfig,
    MMDResult,
    adf_test,
    auc_equivalence_test,
    build_c2st_dataset,
    cd_efficacy,
    default_detector_space,
    default_efficacy_config,
    equivalence_p_value,
    minmax_select,
    mmd_gaussian,
    roc_auc,
    train_and_score_detector,
)
from .forecasting import (
    ForecasterConfig,
    FittedForecaster,
    build_lagged_design,
    fit_forecaster,
    predict,
)
from .graphs import (
    LaggedGraph,
    SummaryGraph,
    edge_auc,
    lagged_parents,
    shd,
    to_summary,
)
from .noise import FittedNoise, NoiseConfig, fit_noise, sample_noise
from .pipeline import (
    CandidateModel,
    SearchConfig,
    SearchReport,
    block_sample,
    default_search_config,
    fit_candidate,
    run_search,
    simulate,
)
from .scm import (
    FunctionalDependency,
    GeneratorConfig,
    NoiseSource,
    TemporalSCM,
    ancestral_sample,
    build_random_scm,
    generate_random_graph,
)

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "C2STSplit",
    "CDConfig",
    "CDResult",
    "CandidateModel",
    "CausimError",
    "ConvergenceError",
    "CsvParseError",
    "DataSizeError",
    "Dataset",
    "DegenerateInputError",
    "DetectionResult",
    "DetectorConfig",
    "FittedForecaster",
    "FittedNoise",
    "ForecasterConfig",
    "FunctionalDependency",
    "GeneratorConfig",
    "LaggedGraph",
    "MMDConfig",
    "MMDResult",
    "NoiseConfig",
    "NoiseSource",
    "NumericInstabilityError",
    "PhaseError",
    "SearchConfig",
    "SearchReport",
    "SummaryGraph",
    "TemporalSCM",
    "acyclicity_h",
    "adf_test",
    "ancestral_sample",
    "auc_equivalence_test",
    "block_sample",
    "build_c2st_dataset",
    "build_lagged_design",
    "build_random_scm",
    "cd_efficacy",
    "default_detector_space",
    "default_efficacy_config",
    "default_search_config",
    "discover",
    "dynotears_discover",
    "edge_auc",
    "equivalence_p_value",
    "fit_candidate",
    "fit_forecaster",
    "fit_noise",
    "generate_random_graph",
    "lagged_parents",
    "lagged_pc_discover",
    "load_csv",
    "minmax_select",
    "mmd_gaussian",
    "parcorr_ci_test",
    "predict",
    "roc_auc",
    "run_search",
    "sample_noise",
    "save_csv",
    "shd",
    "simulate",
    "to_summary",
    "train_and_score_detector",
]
