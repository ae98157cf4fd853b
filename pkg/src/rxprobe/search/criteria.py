"""Loss and failure trigger shared by search, grid and validation."""
from __future__ import annotations


def compute_loss(soft_ber_t, soft_ber_ai):
    """Minimizing this drives the neural receiver's BER above the classical one."""
    return soft_ber_t - soft_ber_ai


def failure_criterion(ber_t: float, ber_ai: float, threshold: float) -> bool:
    """True iff the neural receiver is at most ``threshold`` times as good.

    A neural BER of exactly zero is never a failure.
    """
    if not threshold > 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    if ber_ai <= 0.0:
        return False
    return ber_t / ber_ai <= threshold
