"""Probability calibration for binary classifiers trained on undersampled data.

Undersampling the majority class before training shifts the probabilities
a model learns: it predicts the chance of a positive given that the row
survived sampling, not the population chance. This package provides six
ways to map such shifted estimates back to calibrated probabilities (a
closed-form correction, logistic regression and penalized-spline fits on
the raw or logit scale, and isotonic regression), plus synthetic data
generators, base-model error profiles, metrics, and an experiment harness
with a CLI for running method-comparison grids.
"""

from .base_models import BaseModelSpec, apply_base_model
from .calibrators import (
    CLAMP_EPSILON,
    METHODS,
    Calibrator,
    analytical_calibrate,
    calibrate,
    fit_calibrator,
    from_json,
    logit_clamped,
    to_json,
)
from .datagen import (
    CovariateRanges,
    DataGenConfig,
    SyntheticDataset,
    gen_covariates,
    gen_dataset,
    true_logit,
)
from .errors import (
    ConfigurationError,
    DomainError,
    FitError,
    IngestionError,
    RecalError,
)
from .fitters import (
    GamFit,
    IsotonicFit,
    LogisticFit,
    fit_logistic_irls,
    fit_pav,
    fit_penalized_gam,
    gam_predict,
    logistic_predict,
    pav_predict,
)
from .harness import (
    CellResult,
    ExperimentCell,
    PredictionSet,
    calibrate_file,
    ingest_predictions,
    load_config,
    run_cell,
    run_cells,
    run_grid,
)
from .metrics import MetricsReport, brier, compute_report, mae, nls, rmse
from .sampler import (
    PRESET_BY_NAME,
    PRESETS,
    Preset,
    SamplingConfig,
    undersample,
    undersampled_posterior,
)

__version__ = "0.1.0"

__all__ = [
    "BaseModelSpec",
    "CLAMP_EPSILON",
    "Calibrator",
    "CellResult",
    "ConfigurationError",
    "CovariateRanges",
    "DataGenConfig",
    "DomainError",
    "ExperimentCell",
    "FitError",
    "GamFit",
    "IngestionError",
    "IsotonicFit",
    "LogisticFit",
    "METHODS",
    "MetricsReport",
    "PRESETS",
    "PRESET_BY_NAME",
    "PredictionSet",
    "Preset",
    "RecalError",
    "SamplingConfig",
    "SyntheticDataset",
    "analytical_calibrate",
    "apply_base_model",
    "brier",
    "calibrate",
    "calibrate_file",
    "compute_report",
    "fit_calibrator",
    "fit_logistic_irls",
    "fit_pav",
    "fit_penalized_gam",
    "from_json",
    "gam_predict",
    "gen_covariates",
    "gen_dataset",
    "ingest_predictions",
    "load_config",
    "logistic_predict",
    "logit_clamped",
    "mae",
    "nls",
    "pav_predict",
    "rmse",
    "run_cell",
    "run_cells",
    "run_grid",
    "to_json",
    "true_logit",
    "undersample",
    "undersampled_posterior",
]
