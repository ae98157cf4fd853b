from __future__ import annotations

from dataclasses import dataclass

CONTINUE, HALVE, STOP = "continue", "halve", "stop"


@dataclass
class PlateauSchedule:
    """Halve the learning rate when the best loss stalls; stop after
    ``max_halvings`` halvings have each run out of patience."""

    patience: int = 5
    max_halvings: int = 2
    min_delta: float = 1e-5
    best: float = float("inf")
    stale: int = 0
    halvings: int = 0

    def __post_init__(self):
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if self.max_halvings < 0:
            raise ValueError("max_halvings must be >= 0")

    def update(self, loss: float) -> str:
        if loss < self.best - self.min_delta:
            self.best = loss
            self.stale = 0
            return CONTINUE
        self.stale += 1
        if self.stale < self.patience:
            return CONTINUE
        if self.halvings >= self.max_halvings:
            return STOP
        self.halvings += 1
        self.stale = 0
        return HALVE
