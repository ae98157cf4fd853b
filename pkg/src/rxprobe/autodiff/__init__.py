"""Reverse-mode autodiff over dense real/complex arrays, plus Adam."""
from . import tensor as ops
from .gradcheck import finite_diff, rel_error
from .optim import Adam, AdamState, NonFiniteGradient, adam_step
from .tensor import GradientError, ShapeError, Tape, Tensor, active_tape, record, tensor

__all__ = [
    "Adam",
    "AdamState",
    "GradientError",
    "NonFiniteGradient",
    "ShapeError",
    "Tape",
    "Tensor",
    "active_tape",
    "adam_step",
    "finite_diff",
    "ops",
    "record",
    "rel_error",
    "tensor",
]
