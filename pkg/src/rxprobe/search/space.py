"""Box-bounded scenario space with MinMax re-parametrization."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..autodiff.tensor import Tensor
from ..linksim import ScenarioParams

AXES = ("speed", "delay_spread", "noise_power")


def normalize(x, lo: float, hi: float):
    if not lo < hi:
        raise ValueError(f"need min < max, got [{lo}, {hi}]")
    return (x - lo) / (hi - lo)


def denormalize(x_hat, lo: float, hi: float):
    if not lo < hi:
        raise ValueError(f"need min < max, got [{lo}, {hi}]")
    return x_hat * (hi - lo) + lo


@dataclass(frozen=True)
class SearchAxis:
    """One searched parameter.

    ``low``/``high``/``lattice`` are in external units, related to the
    simulator's units by ``external = scale * internal + offset`` with
    ``scale > 0``.
    """

    name: str
    low: float
    high: float
    lattice: tuple[float, ...]
    scale: float = 1.0
    offset: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.low) and np.isfinite(self.high)):
            raise ValueError(f"{self.name}: bounds must be finite")
        if not self.low < self.high:
            raise ValueError(f"{self.name}: need min < max, got [{self.low}, {self.high}]")
        if not self.scale > 0:
            raise ValueError(f"{self.name}: unit scale must be positive")
        if not self.lattice:
            raise ValueError(f"{self.name}: empty initial lattice")
        bad = [v for v in self.lattice if not self.low <= v <= self.high]
        if bad:
            raise ValueError(f"{self.name}: lattice values {bad} outside [{self.low}, {self.high}]")

    # internal-unit affine map of x_hat, precomputed so unit changes that are
    # exact in floating point give bit-identical simulator inputs
    @property
    def span_internal(self) -> float:
        return (self.high - self.low) / self.scale

    @property
    def low_internal(self) -> float:
        return (self.low - self.offset) / self.scale

    def to_internal(self, x_hat):
        return x_hat * self.span_internal + self.low_internal

    def to_external(self, x_hat):
        return denormalize(x_hat, self.low, self.high)

    def normalize(self, x):
        return normalize(x, self.low, self.high)


def _default_axes() -> tuple[SearchAxis, ...]:
    return (
        SearchAxis("speed", 0.0, 30.0, tuple(float(v) for v in range(0, 31))),
        SearchAxis("delay_spread", 10.0, 400.0, tuple(float(v) for v in range(10, 401, 10))),
        # noise power x_n in dBm, unit signal power: SNR = -x_n
        SearchAxis("noise_power", -22.0, 0.0, (-20.0, -15.0, -10.0, -5.0)),
    )


@dataclass(frozen=True)
class SearchSpace:
    axes: tuple[SearchAxis, ...] = field(default_factory=_default_axes)

    def __post_init__(self):
        names = tuple(a.name for a in self.axes)
        if names != AXES:
            raise ValueError(f"search axes must be {AXES}, got {names}")

    def __getitem__(self, name: str) -> SearchAxis:
        return self.axes[AXES.index(name)]

    @classmethod
    def from_bounds(cls, speed=(0.0, 30.0), delay_spread=(10.0, 400.0), snr=(0.0, 22.0)) -> "SearchSpace":
        """Default lattices clipped to the given bounds (SNR bounds in dB)."""
        base = _default_axes()
        lims = [tuple(speed), tuple(delay_spread), (-snr[1], -snr[0])]
        axes = []
        for ax, (lo, hi) in zip(base, lims):
            lat = tuple(v for v in ax.lattice if lo <= v <= hi) or ((lo + hi) / 2.0,)
            axes.append(SearchAxis(ax.name, float(lo), float(hi), lat))
        return cls(tuple(axes))

    def lattice_size(self) -> int:
        return int(np.prod([len(a.lattice) for a in self.axes]))

    def sample_normalized(self, rng: np.random.Generator) -> np.ndarray:
        """Uniform draw from the lattice product set, in normalized coordinates."""
        out = np.empty(len(self.axes))
        for i, ax in enumerate(self.axes):
            out[i] = ax.normalize(ax.lattice[rng.integers(len(ax.lattice))])
        return out

    def scenario(self, x_hat) -> ScenarioParams:
        """Simulator parameters for normalized values (arrays or tensors)."""
        vals = [ax.to_internal(x) for ax, x in zip(self.axes, x_hat)]
        return ScenarioParams(*vals)

    def external(self, x_hat) -> dict[str, float]:
        x_hat = [float(x.data) if isinstance(x, Tensor) else float(x) for x in x_hat]
        return {ax.name: float(ax.to_external(x)) for ax, x in zip(self.axes, x_hat)}

    def to_dict(self) -> dict:
        return {"axes": [dict(name=a.name, low=a.low, high=a.high, lattice=list(a.lattice),
                              scale=a.scale, offset=a.offset) for a in self.axes]}

    @classmethod
    def from_dict(cls, d: dict) -> "SearchSpace":
        return cls(tuple(SearchAxis(a["name"], a["low"], a["high"], tuple(a["lattice"]),
                                    a.get("scale", 1.0), a.get("offset", 0.0)) for a in d["axes"]))
