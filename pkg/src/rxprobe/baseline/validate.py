"""Large-sample re-evaluation of labelled configurations."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable

from .. import seeding
from ..linksim import ScenarioParams
from ..search.criteria import failure_criterion
from .metrics import ConfusionCounts

FAILURE_LABELS = ("FailSearch", "FailInit")
THRESHOLDS = (0.9, 1.0)


@dataclass
class LabelledConfig:
    id: int
    label: str  # FailSearch | FailInit | NotFail
    speed: float
    delay_spread: float
    snr: float

    @property
    def params(self) -> ScenarioParams:
        return ScenarioParams(self.speed, self.delay_spread, ScenarioParams.snr_to_noise(self.snr))


@dataclass
class ValidationRow:
    id: int
    label: str
    speed: float
    delay_spread: float
    snr: float
    ber_t: float
    ber_ai: float
    fails: dict[str, bool] = field(default_factory=dict)  # threshold -> large-sample verdict

    def validated(self, threshold: float) -> bool:
        fails = self.fails[str(threshold)]
        return fails if self.label in FAILURE_LABELS else not fails

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ValidationResult:
    rows: list[ValidationRow]
    n_realizations: int
    thresholds: tuple[float, ...]

    def counts(self, threshold: float) -> ConfusionCounts:
        c = ConfusionCounts()
        for r in self.rows:
            c.add(r.label, r.validated(threshold))
        return c

    def validated_failures(self, threshold: float) -> list[ValidationRow]:
        return [r for r in self.rows if r.label in FAILURE_LABELS and r.validated(threshold)]


def validate_configs(evaluate: Callable[[ScenarioParams, int, int], tuple[float, float]],
                     configs: list[LabelledConfig], n_realizations: int = 1500,
                     thresholds=THRESHOLDS, seed: int = 0) -> ValidationResult:
    """Re-run each configuration over ``n_realizations`` fresh realizations.

    ``evaluate(params, seed, n)`` returns pooled (BER_t, BER_AI). All configs
    share one validation stream, so the verdict depends only on the
    parameters, never on the label.
    """
    if n_realizations < 1:
        raise ValueError("n_realizations must be >= 1")
    vseed = seeding.derive(seed, seeding.STREAM_VALIDATION)
    rows = []
    for cfg in sorted(configs, key=lambda c: c.id):
        bt, ba = evaluate(cfg.params, vseed, n_realizations)
        rows.append(ValidationRow(cfg.id, cfg.label, cfg.speed, cfg.delay_spread, cfg.snr, bt, ba,
                                  {str(t): failure_criterion(bt, ba, t) for t in thresholds}))
    return ValidationResult(rows, n_realizations, tuple(thresholds))
