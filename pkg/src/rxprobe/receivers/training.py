"""Training presets and the BCE training loop for the neural receiver."""
from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .. import seeding
from ..autodiff import Adam, Tape, ops
from ..linksim import ScenarioParams, SignalConfig, apply_channel, sample_realization, transmit_batch
from ..linksim.config import bits_per_symbol
from .classic import hard_ber, ls_estimate
from .neural import NeuralReceiver

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Axis:
    """A discrete value set (``values``) or a continuous interval (``low``, ``high``)."""

    values: tuple[float, ...] | None = None
    low: float | None = None
    high: float | None = None

    def __post_init__(self):
        if (self.values is None) == (self.low is None or self.high is None):
            raise ValueError("axis needs either a value set or an interval")
        if self.values is None and not self.low <= self.high:
            raise ValueError("interval low must not exceed high")

    @classmethod
    def discrete(cls, *values: float) -> "Axis":
        return cls(values=tuple(float(v) for v in values))

    @classmethod
    def interval(cls, low: float, high: float) -> "Axis":
        return cls(low=float(low), high=float(high))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.values is not None:
            return rng.choice(np.asarray(self.values), size=n)
        return rng.uniform(self.low, self.high, size=n)


@dataclass(frozen=True)
class TrainPreset:
    name: str
    modulations: tuple[str, ...]
    ebno_db: Axis
    delay_spread: Axis
    speed: Axis
    profiles: tuple[str, ...]

    def sample(self, rng: np.random.Generator, batch: int) -> tuple[str, str, ScenarioParams]:
        """One modulation and profile per batch, scenario parameters per item."""
        modulation = self.modulations[rng.integers(len(self.modulations))]
        profile = self.profiles[rng.integers(len(self.profiles))]
        ebno = self.ebno_db.sample(rng, batch)
        snr = ScenarioParams.ebno_to_snr(ebno, modulation)
        params = ScenarioParams(
            speed=self.speed.sample(rng, batch),
            delay_spread=self.delay_spread.sample(rng, batch),
            noise_power=ScenarioParams.snr_to_noise(snr),
        )
        return modulation, profile, params


_EVEN_EBNO = Axis.discrete(*range(0, 23, 2))

TRAIN_PRESETS = {
    "PTLC": TrainPreset(
        "PTLC", ("16QAM",), Axis.discrete(0, 1, 2, 3, 18, 19, 20),
        Axis.discrete(0, 10, 20, 300, 350, 400), Axis.discrete(0, 1, 2, 20, 25, 30), ("TDL-D",),
    ),
    "FTLC": TrainPreset(
        "FTLC", ("64QAM",), _EVEN_EBNO, Axis.interval(0, 400), Axis.interval(0, 30), ("TDL-D",),
    ),
    "FTHC": TrainPreset(
        "FTHC", ("QPSK", "16QAM", "64QAM"), _EVEN_EBNO, Axis.interval(10, 400),
        Axis.interval(0, 30), ("TDL-B", "TDL-C", "TDL-D"),
    ),
}


@dataclass
class TrainBudget:
    n_steps: int = 3000
    batch: int = 16
    lr: float = 2e-3
    lr_final: float = 1e-5
    seed: int = 0
    log_every: int = 100
    precision: str = "float32"

    def lr_at(self, step: int) -> float:
        """Cosine decay from ``lr`` to ``lr_final``."""
        frac = step / max(self.n_steps - 1, 1)
        return self.lr_final + 0.5 * (self.lr - self.lr_final) * (1.0 + math.cos(math.pi * frac))


@dataclass
class TrainResult:
    preset: str
    budget: TrainBudget
    losses: list[float] = field(default_factory=list)
    seconds: float = 0.0

    def smoothed(self, window: int = 50) -> list[float]:
        """Mean loss over consecutive ``window``-step blocks."""
        n = len(self.losses) // window
        return [float(np.mean(self.losses[i * window:(i + 1) * window])) for i in range(n)]

    def manifest(self) -> dict:
        return {"preset": self.preset, "budget": asdict(self.budget),
                "steps_done": len(self.losses), "seconds": round(self.seconds, 1),
                "final_loss": self.losses[-1] if self.losses else None,
                "loss_curve": self.smoothed()}


class TrainingDiverged(RuntimeError):
    pass


def simulate_batch(seed: int, config: SignalConfig, profile: str, params: ScenarioParams,
                   batch: int, n_sinusoids: int = 16, first_item: int = 0):
    """Numpy-only forward simulation: (bits grid, rx, pilots, mask, H_ls, H)."""
    bits, tx, pilots, mask = transmit_batch(seed, config, batch, first_item)
    real = sample_realization(seed, batch, profile, n_sinusoids, config, first_item)
    rx, h = apply_channel(tx, real, params, profile, config)
    h_ls = ls_estimate(rx.data, pilots, mask)
    return bits, rx.data, pilots, mask, h_ls.data, h.data


def bce_loss(llr, bits: np.ndarray, data_mask: np.ndarray):
    """Binary cross-entropy of P(b=1) = sigmoid(-LLR) over data bits."""
    sel = llr[:, data_mask]
    b = bits[:, data_mask]
    return ops.mean(ops.softplus(sel * -(1.0 - 2.0 * b)))


def train(model: NeuralReceiver, preset: TrainPreset | str, budget: TrainBudget | None = None,
          config: SignalConfig | None = None) -> TrainResult:
    preset = TRAIN_PRESETS[preset] if isinstance(preset, str) else preset
    budget = budget or TrainBudget()
    if budget.n_steps < 1 or budget.batch < 1:
        raise ValueError("training budget must be positive")
    base = config or SignalConfig()
    model.set_trainable(True)
    opt = Adam(model.params, lr=budget.lr)
    result = TrainResult(preset.name, budget)
    t0 = time.perf_counter()
    for step in range(budget.n_steps):
        rng = seeding.rng(budget.seed, seeding.STREAM_TRAIN, step)
        modulation, profile, params = preset.sample(rng, budget.batch)
        cfg = base.with_modulation(modulation)
        data_seed = seeding.derive(budget.seed, seeding.STREAM_TRAIN, step, 1)
        bits, rx, pilots, mask, h_ls, _ = simulate_batch(data_seed, cfg, profile, params, budget.batch)
        opt.lr = budget.lr_at(step)
        with Tape() as tape:
            llr = model.llr_for(model(rx, pilots, h_ls, precision=budget.precision), cfg.bits_per_symbol)
            loss = bce_loss(llr, bits, cfg.data_mask)
        if not np.isfinite(loss.data):
            raise TrainingDiverged(f"loss became {loss.item()} at step {step}")
        tape.backward(loss)
        opt.step()
        result.losses.append(float(loss.data))
        if budget.log_every and step % budget.log_every == 0:
            recent = np.mean(result.losses[-budget.log_every:])
            log.info("%s step %d loss %.4f lr %.2e", preset.name, step, recent, opt.lr)
    result.seconds = time.perf_counter() - t0
    model.set_trainable(False)
    return result


def evaluate_ber(model: NeuralReceiver, config: SignalConfig, profile: str, params: ScenarioParams,
                 batch: int, seed: int) -> float:
    bits, rx, pilots, mask, h_ls, _ = simulate_batch(seed, config, profile, params, batch)
    llr = model.llr_for(model(rx, pilots, h_ls), config.bits_per_symbol)
    return hard_ber(llr, bits, config.data_mask)
