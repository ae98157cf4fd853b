"""Episode loop and campaign driver of the gradient failure search."""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .. import seeding
from ..autodiff import AdamState, NonFiniteGradient, Tape, Tensor, adam_step
from ..linksim import ScenarioParams
from ..pipeline import PairEval
from .criteria import compute_loss, failure_criterion
from .schedule import HALVE, STOP, PlateauSchedule
from .space import SearchSpace

log = logging.getLogger(__name__)

FAIL_SEARCH, FAIL_INIT, NOT_FAIL = "FailSearch", "FailInit", "NotFail"
OUTCOMES = (FAIL_SEARCH, FAIL_INIT, NOT_FAIL)
TRIGGERED, EARLY_STOPPED, MAX_ITERS, ABORTED = "triggered", "early_stopped", "max_iters", "aborted"

# (params, seed, batch) -> PairEval
Objective = Callable[[ScenarioParams, int, int], PairEval]


@dataclass
class SearchConfig:
    n_episodes: int = 100
    max_iters: int = 100
    batch: int = 25
    lr: float = 0.01
    patience: int = 5
    max_halvings: int = 2
    min_delta: float = 1e-5
    threshold: float = 0.9
    resample: bool = True
    seed: int = 0

    def __post_init__(self):
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")
        if self.max_iters < 1 or self.n_episodes < 0 or self.batch < 1:
            raise ValueError("max_iters and batch must be >= 1, n_episodes >= 0")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if not self.lr > 0:
            raise ValueError("lr must be positive")


@dataclass
class IterationRow:
    iteration: int
    normalized: list[float]
    params: dict[str, float]  # external units
    scenario: dict[str, float]  # simulator units, with SNR in dB
    ber_t: float
    ber_ai: float
    soft_t: float
    soft_ai: float
    loss: float
    lr: float  # rate of the step that follows this evaluation


@dataclass
class EpisodeRecord:
    episode: int
    start: dict[str, float]
    trace: list[IterationRow] = field(default_factory=list)
    outcome: str = NOT_FAIL
    stop_reason: str = MAX_ITERS
    error: str | None = None

    @property
    def iterations(self) -> int:
        return len(self.trace)

    @property
    def final(self) -> IterationRow:
        return self.trace[-1]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["iterations"] = self.iterations
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EpisodeRecord":
        rows = [IterationRow(**r) for r in d["trace"]]
        return cls(d["episode"], d["start"], rows, d["outcome"], d["stop_reason"], d.get("error"))


def _scenario(space: SearchSpace, x: np.ndarray) -> dict[str, float]:
    p = space.scenario(x)
    return {"speed": float(p.speed), "delay_spread": float(p.delay_spread),
            "snr": float(-p.noise_power)}


def sample_initial(space: SearchSpace, seed: int, episode: int) -> np.ndarray:
    """Normalized start point drawn uniformly from the lattice."""
    return space.sample_normalized(seeding.rng(seed, seeding.STREAM_INIT, episode))


def _iteration_seed(config: SearchConfig, episode: int, iteration: int) -> int:
    it = iteration if config.resample else 0
    return seeding.derive(config.seed, seeding.STREAM_EPISODE, episode, it)


def run_episode(objective: Objective, space: SearchSpace, config: SearchConfig, episode: int,
                start: np.ndarray | None = None) -> EpisodeRecord:
    x = np.array(sample_initial(space, config.seed, episode) if start is None else start, dtype=float)
    rec = EpisodeRecord(episode, space.external(x))
    schedule = PlateauSchedule(config.patience, config.max_halvings, config.min_delta)
    adam = AdamState(lr=config.lr)

    for it in range(config.max_iters):
        leaves = [Tensor(v, requires_grad=True, name=ax.name) for v, ax in zip(x, space.axes)]
        with Tape() as tape:
            ev = objective(space.scenario(leaves), _iteration_seed(config, episode, it), config.batch)
            loss = compute_loss(ev.soft_t, ev.soft_ai)
        lval = float(loss.data)
        rec.trace.append(IterationRow(it, x.tolist(), space.external(x), _scenario(space, x),
                                      ev.ber_t, ev.ber_ai, float(ev.soft_t.data),
                                      float(ev.soft_ai.data), lval, adam.lr))

        if failure_criterion(ev.ber_t, ev.ber_ai, config.threshold):
            rec.outcome = FAIL_INIT if it <= 1 else FAIL_SEARCH
            rec.stop_reason = TRIGGERED
            return rec
        if not math.isfinite(lval):
            rec.stop_reason, rec.error = ABORTED, "non-finite loss"
            return rec
        action = schedule.update(lval)
        if action == STOP:
            rec.stop_reason = EARLY_STOPPED
            return rec
        if it == config.max_iters - 1:
            break
        if action == HALVE:
            adam.lr *= 0.5
            rec.trace[-1].lr = adam.lr
        grads = tape.backward(loss, wrt=leaves)
        try:
            new = adam_step(adam, [x], [np.array([grads[leaf] for leaf in leaves], dtype=float)])
        except NonFiniteGradient:
            rec.stop_reason, rec.error = ABORTED, "non-finite gradient"
            return rec
        x = np.clip(new[0], 0.0, 1.0)
    rec.stop_reason = MAX_ITERS
    return rec


@dataclass
class CampaignResult:
    config: SearchConfig
    records: list[EpisodeRecord]

    @property
    def summary(self) -> dict:
        counts = {o: 0 for o in OUTCOMES}
        for r in self.records:
            counts[r.outcome] += 1
        counts["episodes"] = len(self.records)
        counts["total_tests"] = sum(r.iterations for r in self.records)
        counts["aborted"] = sum(r.stop_reason == ABORTED for r in self.records)
        return counts


def run_campaign(objective: Objective, space: SearchSpace, config: SearchConfig,
                 on_record: Callable[[EpisodeRecord], None] | None = None) -> CampaignResult:
    """Run ``config.n_episodes`` independent episodes sequentially."""
    records = []
    for ep in range(config.n_episodes):
        rec = run_episode(objective, space, config, ep)
        log.info("episode %d: %s after %d iterations (%s)", ep, rec.outcome, rec.iterations, rec.stop_reason)
        records.append(rec)
        if on_record is not None:
            on_record(rec)
    return CampaignResult(config, records)
