"""Classical and neural receivers plus training."""
from .classic import (
    LLR_MAX,
    classical_receiver,
    demap_llr,
    hard_ber,
    hard_errors,
    interpolation_matrix,
    lmmse_equalize,
    ls_estimate,
    soft_ber,
)
from .neural import MODEL_PRESETS, PARAM_TARGETS, ModelConfig, NeuralReceiver, build_model, plane_index

__all__ = [
    "LLR_MAX",
    "MODEL_PRESETS",
    "PARAM_TARGETS",
    "ModelConfig",
    "NeuralReceiver",
    "build_model",
    "classical_receiver",
    "demap_llr",
    "hard_ber",
    "hard_errors",
    "interpolation_matrix",
    "lmmse_equalize",
    "ls_estimate",
    "plane_index",
    "soft_ber",
]
