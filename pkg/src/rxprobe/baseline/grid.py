"""Exhaustive grid baseline over (speed, delay spread, SNR)."""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .. import seeding
from ..linksim import ScenarioParams
from ..search.criteria import failure_criterion


@dataclass(frozen=True)
class GridAxis:
    low: float
    high: float
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("grid axis needs at least one point")
        if self.count > 1 and not self.low < self.high:
            raise ValueError(f"need min < max, got [{self.low}, {self.high}]")

    def values(self) -> np.ndarray:
        # endpoints inclusive: ``count`` lattice points
        return np.linspace(self.low, self.high, self.count)


@dataclass(frozen=True)
class GridSpec:
    speed: GridAxis = GridAxis(0.0, 30.0, 25)
    delay_spread: GridAxis = GridAxis(0.0, 400.0, 25)
    snr: GridAxis = GridAxis(0.0, 22.0, 16)

    @property
    def total(self) -> int:
        return math.prod(a.count for a in (self.speed, self.delay_spread, self.snr))

    def points(self):
        """(id, speed, delay spread, SNR) in row-major order."""
        grid = itertools.product(self.speed.values(), self.delay_spread.values(), self.snr.values())
        for i, (s, d, n) in enumerate(grid):
            yield i, float(s), float(d), float(n)

    @classmethod
    def reduced(cls, speed: int = 13, delay_spread: int = 13, snr: int = 8) -> "GridSpec":
        d = cls()
        return cls(GridAxis(d.speed.low, d.speed.high, speed),
                   GridAxis(d.delay_spread.low, d.delay_spread.high, delay_spread),
                   GridAxis(d.snr.low, d.snr.high, snr))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        return cls(**{k: GridAxis(**v) for k, v in d.items()})


@dataclass
class GridRecord:
    id: int
    speed: float
    delay_spread: float
    snr: float
    ber_t: float
    ber_ai: float
    failed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def run_grid(objective: Callable, spec: GridSpec, batch: int = 25, threshold: float = 0.9,
             seed: int = 0, on_record: Callable[[GridRecord], None] | None = None) -> list[GridRecord]:
    """Evaluate every lattice point once; each point is one test."""
    out = []
    for i, s, d, snr in spec.points():
        ev = objective(ScenarioParams(s, d, ScenarioParams.snr_to_noise(snr)),
                       seeding.derive(seed, seeding.STREAM_GRID, i), batch)
        rec = GridRecord(i, s, d, snr, ev.ber_t, ev.ber_ai,
                         failure_criterion(ev.ber_t, ev.ber_ai, threshold))
        out.append(rec)
        if on_record is not None:
            on_record(rec)
    return out
