"""Tapped-delay-line power/delay tables."""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class ChannelProfile:
    """Normalized delays and unit-sum powers; tap 0 is the LOS tap if ``los``."""

    name: str
    delays: tuple[float, ...]
    powers: tuple[float, ...]
    los: bool = False

    def __post_init__(self):
        if len(self.delays) != len(self.powers) or not self.delays:
            raise ValueError(f"{self.name}: delays and powers must be non-empty and aligned")
        if self.delays[0] != 0.0 or min(self.delays) < 0.0:
            raise ValueError(f"{self.name}: first delay must be 0 and all delays non-negative")
        if abs(sum(self.powers) - 1.0) > 1e-12:
            raise ValueError(f"{self.name}: tap powers sum to {sum(self.powers)}, expected 1")

    @property
    def n_taps(self) -> int:
        return len(self.delays)

    @property
    def n_diffuse(self) -> int:
        return self.n_taps - int(self.los)

    @classmethod
    def from_table(cls, name: str, delays, powers_db, los: bool = False,
                   k_factor_db: float | None = None) -> "ChannelProfile":
        delays = [float(d) for d in delays]
        p = 10.0 ** (np.asarray(powers_db, dtype=float) / 10.0)
        if los:
            k = 10.0 ** ((10.0 if k_factor_db is None else k_factor_db) / 10.0)
            p = np.concatenate([[k * p.sum()], p])
            delays = [0.0] + delays
        p = p / p.sum()
        # absorb rounding so the invariant holds to the last bit we check
        p[-1] = 1.0 - p[:-1].sum()
        return cls(name, tuple(delays), tuple(float(x) for x in p), bool(los))


def load_profiles(path: str | Path | None = None) -> dict[str, ChannelProfile]:
    if path is None:
        text = resources.files(__package__).joinpath("profiles.json").read_text()
    else:
        text = Path(path).read_text()
    raw = json.loads(text)
    out = {}
    for entry in raw["profiles"]:
        prof = ChannelProfile.from_table(
            entry["name"], entry["delays"], entry["powers_db"],
            entry.get("los", False), entry.get("k_factor_db"),
        )
        out[prof.name] = prof
    return out


@lru_cache(maxsize=1)
def _defaults() -> dict[str, ChannelProfile]:
    return load_profiles()


def get_profile(name: str) -> ChannelProfile:
    known = _defaults()
    try:
        return known[name]
    except KeyError:
        raise ValueError(f"unknown channel profile {name!r}; known: {sorted(known)}") from None
