"""Python access to the GAAL core: runs, datasets, the SVM learner and pool selection."""

from ._core import (
    ConfigError,
    ContractError,
    DimensionError,
    FormatError,
    idx_round_trip,
    mixed_schedule,
    normalize_config,
    run,
    select_svm_active,
    svm_objective,
    svm_train,
    two_gaussians,
)

__all__ = [
    "ConfigError",
    "ContractError",
    "DimensionError",
    "FormatError",
    "idx_round_trip",
    "mixed_schedule",
    "normalize_config",
    "run",
    "select_svm_active",
    "svm_objective",
    "svm_train",
    "two_gaussians",
]
