"""Grid-search baseline, offline validation and efficiency metrics."""
from .grid import GridAxis, GridRecord, GridSpec, run_grid
from .metrics import (
    EARLY_STOP_FACTORS,
    ConfusionCounts,
    CostModelInput,
    compute_metrics,
    cost_curves,
    cost_model,
    relative_reduction,
    tests_per_failure,
)
from .validate import LabelledConfig, ValidationResult, ValidationRow, validate_configs

__all__ = [
    "EARLY_STOP_FACTORS",
    "ConfusionCounts",
    "CostModelInput",
    "GridAxis",
    "GridRecord",
    "GridSpec",
    "LabelledConfig",
    "ValidationResult",
    "ValidationRow",
    "compute_metrics",
    "cost_curves",
    "cost_model",
    "relative_reduction",
    "run_grid",
    "tests_per_failure",
    "validate_configs",
]
