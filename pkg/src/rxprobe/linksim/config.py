from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0

MODULATION_BITS = {"QPSK": 2, "16QAM": 4, "64QAM": 6}

# physical validity range of each scenario parameter; the search space is
# always a sub-box of this
PARAM_LIMITS = {
    "speed": (0.0, 30.0),  # m/s
    "delay_spread": (0.0, 400.0),  # ns
    "noise_power": (-40.0, 10.0),  # dBm, relative to unit signal power
}


def bits_per_symbol(modulation: str) -> int:
    try:
        return MODULATION_BITS[modulation]
    except KeyError:
        raise ValueError(f"unknown modulation {modulation!r}; expected one of {sorted(MODULATION_BITS)}") from None


@dataclass(frozen=True)
class SignalConfig:
    """Uplink slot layout: 14 symbols, 15 kHz, 6 PRBs, two DM-RS symbols."""

    n_symbols: int = 14
    subcarrier_spacing: float = 15e3
    n_prb: int = 6
    pilot_symbols: tuple[int, ...] = (2, 11)
    modulation: str = "16QAM"
    carrier_frequency: float = 3.5e9

    def __post_init__(self):
        bits_per_symbol(self.modulation)
        if len(self.pilot_symbols) != len(set(self.pilot_symbols)):
            raise ValueError("pilot_symbols must be distinct")
        if not all(0 <= p < self.n_symbols for p in self.pilot_symbols):
            raise ValueError(f"pilot_symbols {self.pilot_symbols} outside [0, {self.n_symbols})")
        object.__setattr__(self, "pilot_symbols", tuple(sorted(self.pilot_symbols)))

    @property
    def n_subcarriers(self) -> int:
        return 12 * self.n_prb

    @property
    def bits_per_symbol(self) -> int:
        return bits_per_symbol(self.modulation)

    @property
    def grid_shape(self) -> tuple[int, int]:
        return (self.n_symbols, self.n_subcarriers)

    @property
    def symbol_duration(self) -> float:
        # one slot of n_symbols lasts 1 ms at 15 kHz, CP included
        return 1e-3 * (15e3 / self.subcarrier_spacing) / self.n_symbols

    @property
    def pilot_mask(self) -> np.ndarray:
        mask = np.zeros(self.grid_shape, dtype=bool)
        mask[list(self.pilot_symbols), :] = True
        return mask

    @property
    def data_mask(self) -> np.ndarray:
        return ~self.pilot_mask

    @property
    def n_data_re(self) -> int:
        return int(self.data_mask.sum())

    def with_modulation(self, modulation: str) -> "SignalConfig":
        return SignalConfig(self.n_symbols, self.subcarrier_spacing, self.n_prb,
                            self.pilot_symbols, modulation, self.carrier_frequency)

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_symbols": self.n_symbols,
            "subcarrier_spacing": self.subcarrier_spacing,
            "n_prb": self.n_prb,
            "pilot_symbols": list(self.pilot_symbols),
            "modulation": self.modulation,
            "carrier_frequency": self.carrier_frequency,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SignalConfig":
        d = dict(d)
        if "pilot_symbols" in d:
            d["pilot_symbols"] = tuple(d["pilot_symbols"])
        return cls(**d)


@dataclass
class ScenarioParams:
    """Speed (m/s), delay spread (ns) and noise power (dBm).

    Values may be floats, arrays of shape (batch,) or autodiff tensors.
    """

    speed: Any
    delay_spread: Any
    noise_power: Any
    limits: dict[str, tuple[float, float]] = field(default_factory=lambda: dict(PARAM_LIMITS))

    def check(self, slack: float = 1e-9) -> None:
        for name in ("speed", "delay_spread", "noise_power"):
            value = getattr(self, name)
            data = np.asarray(getattr(value, "data", value), dtype=float)
            lo, hi = self.limits[name]
            if not np.all(np.isfinite(data)):
                raise ValueError(f"{name} is not finite")
            if np.any(data < lo - slack) or np.any(data > hi + slack):
                raise ValueError(f"{name}={data.tolist()} outside [{lo}, {hi}]")

    @staticmethod
    def snr_to_noise(snr_db):
        """Unit signal power: noise power in dBm is minus the SNR in dB."""
        return -snr_db

    @staticmethod
    def ebno_to_snr(ebno_db, modulation: str):
        return ebno_db + 10.0 * np.log10(bits_per_symbol(modulation))
