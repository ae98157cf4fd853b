"""Confusion counts, search metrics and test-cost arithmetic."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass


@dataclass
class ConfusionCounts:
    """Validated-true / validated-false counts per search outcome class."""

    fail_search_true: int = 0
    fail_search_false: int = 0
    fail_init_true: int = 0
    fail_init_false: int = 0
    not_fail_true: int = 0
    not_fail_false: int = 0

    def __post_init__(self):
        for k, v in asdict(self).items():
            if v < 0:
                raise ValueError(f"{k} must be non-negative, got {v}")

    @property
    def tp(self) -> int:
        return self.fail_search_true + self.fail_init_true

    @property
    def fp(self) -> int:
        return self.fail_search_false + self.fail_init_false

    @property
    def tn(self) -> int:
        return self.not_fail_true

    @property
    def fn(self) -> int:
        # NotFail configurations that validate as failures
        return self.not_fail_false

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def class_totals(self) -> dict[str, int]:
        return {"FailSearch": self.fail_search_true + self.fail_search_false,
                "FailInit": self.fail_init_true + self.fail_init_false,
                "NotFail": self.not_fail_true + self.not_fail_false}

    def add(self, label: str, validated_true: bool) -> None:
        key = {"FailSearch": "fail_search", "FailInit": "fail_init", "NotFail": "not_fail"}[label]
        key += "_true" if validated_true else "_false"
        setattr(self, key, getattr(self, key) + 1)

    def to_dict(self) -> dict:
        return asdict(self)


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def compute_metrics(counts: ConfusionCounts) -> dict[str, float | None]:
    """Accuracy, precision and recall; ``None`` where a denominator is zero."""
    return {
        "accuracy": _ratio(counts.tp + counts.tn, counts.total),
        "precision": _ratio(counts.tp, counts.tp + counts.fp),
        "recall": _ratio(counts.tp, counts.tp + counts.fn),
    }


def tests_per_failure(total_tests: int, validated_failures: int) -> float:
    """``inf`` when nothing validated."""
    if validated_failures < 0 or total_tests < 0:
        raise ValueError("counts must be non-negative")
    if validated_failures == 0:
        return math.inf
    return total_tests / validated_failures


def relative_reduction(baseline: float, candidate: float) -> float:
    return (baseline - candidate) / baseline


EARLY_STOP_FACTORS = (1.0, 0.5, 0.25)


@dataclass(frozen=True)
class CostModelInput:
    k: tuple[int, ...]
    n_episodes: int = 100
    max_iters: int = 100
    factor: float = 1.0
    d: int | None = None

    def __post_init__(self):
        if not self.k or any(v < 1 for v in self.k):
            raise ValueError("grid points per axis must be positive")
        if self.n_episodes < 1 or self.max_iters < 1 or not self.factor > 0:
            raise ValueError("episodes, iterations and factor must be positive")
        if self.d is not None and self.d < 1:
            raise ValueError("d must be positive")

    @property
    def dims(self) -> int:
        return self.d if self.d is not None else len(self.k)


def cost_model(inp: CostModelInput) -> dict[str, float]:
    """Grid cost is the product of per-axis points (``k**d`` for a single
    ``k``); gradient search cost is ``N_e * I * d * factor``."""
    if len(inp.k) == 1:
        grid = inp.k[0] ** inp.dims
    elif inp.d is None or inp.d == len(inp.k):
        grid = math.prod(inp.k)
    else:
        raise ValueError(f"{len(inp.k)} axis sizes given for d={inp.d}")
    return {"d": inp.dims, "grid_tests": grid,
            "gradient_tests": inp.n_episodes * inp.max_iters * inp.dims * inp.factor}


def cost_curves(k: int = 10, d_max: int = 10, n_episodes: int = 100, max_iters: int = 100,
                factors=EARLY_STOP_FACTORS) -> list[dict[str, float]]:
    rows = []
    for d in range(1, d_max + 1):
        for f in factors:
            rows.append({"k": k, "factor": f,
                         **cost_model(CostModelInput((k,), n_episodes, max_iters, f, d))})
    return rows
