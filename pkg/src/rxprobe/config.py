"""Campaign configuration files (YAML or JSON), validated with pydantic.

Top-level sections: ``preset``, ``seed``, ``signal``, ``channel``, ``model``,
``train``, ``search``, ``grid``, ``validation``. Unknown keys are rejected.
"""
from __future__ import annotations

from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .linksim.config import MODULATION_BITS


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class Bounds(_Section):
    min: float
    max: float

    @model_validator(mode="after")
    def _ordered(self):
        if not self.min < self.max:
            raise ValueError(f"max ({self.max}) must be greater than min ({self.min})")
        return self


class SignalSection(_Section):
    modulation: Literal["QPSK", "16QAM", "64QAM"] | None = None  # None: model's highest trained order
    n_symbols: int = Field(14, ge=4)
    n_prb: int = Field(6, ge=1)
    subcarrier_spacing: float = Field(15e3, gt=0)
    carrier_frequency: float = Field(3.5e9, gt=0)
    pilot_symbols: tuple[int, ...] = (2, 11)


class ChannelSection(_Section):
    profile: Literal["TDL-B", "TDL-C", "TDL-D"] = "TDL-D"
    n_sinusoids: int = Field(16, ge=8)


class ModelSection(_Section):
    preset: Literal["PTLC", "FTLC", "FTHC", "FTHC-desk"] | None = None
    path: str | None = None


class TrainSection(_Section):
    steps: int = Field(3000, ge=1)
    batch: int = Field(16, ge=1)
    lr: float = Field(2e-3, gt=0)
    lr_final: float = Field(1e-5, gt=0)
    precision: Literal["float32", "float64"] = "float32"


class SearchSection(_Section):
    episodes: int = Field(100, ge=0)
    max_iters: int = Field(100, ge=1)
    batch: int = Field(25, ge=1)
    lr: float = Field(0.01, gt=0)
    patience: int = Field(5, ge=1)
    max_halvings: int = Field(2, ge=0)
    min_delta: float = Field(1e-5, ge=0)
    threshold: float = Field(0.9, gt=0)
    resample: bool = True
    speed: Bounds = Bounds(min=0.0, max=30.0)
    delay_spread: Bounds = Bounds(min=10.0, max=400.0)
    snr: Bounds = Bounds(min=0.0, max=22.0)

    @model_validator(mode="after")
    def _inside_limits(self):
        for name, lo, hi in (("speed", 0.0, 30.0), ("delay_spread", 0.0, 400.0), ("snr", -10.0, 40.0)):
            b = getattr(self, name)
            if b.min < lo or b.max > hi:
                raise ValueError(f"{name} bounds [{b.min}, {b.max}] exceed the simulator range [{lo}, {hi}]")
        return self


class GridAxisSection(_Section):
    min: float
    max: float
    count: int = Field(ge=1)

    @model_validator(mode="after")
    def _ordered(self):
        if self.count > 1 and not self.min < self.max:
            raise ValueError(f"max ({self.max}) must be greater than min ({self.min})")
        return self


class GridSection(_Section):
    batch: int = Field(25, ge=1)
    threshold: float = Field(0.9, gt=0)
    speed: GridAxisSection = GridAxisSection(min=0.0, max=30.0, count=25)
    delay_spread: GridAxisSection = GridAxisSection(min=0.0, max=400.0, count=25)
    snr: GridAxisSection = GridAxisSection(min=0.0, max=22.0, count=16)


class ValidationSection(_Section):
    n_realizations: int = Field(1500, ge=1)
    thresholds: tuple[float, ...] = (0.9, 1.0)
    chunk: int = Field(50, ge=1)

    @model_validator(mode="after")
    def _positive(self):
        if not self.thresholds or any(t <= 0 for t in self.thresholds):
            raise ValueError("thresholds must be a non-empty list of positive numbers")
        return self


class Config(_Section):
    preset: Literal["PTLC", "FTLC", "FTHC", "FTHC-desk"] = "PTLC"
    seed: int = Field(0, ge=0)
    signal: SignalSection = SignalSection()
    channel: ChannelSection = ChannelSection()
    model: ModelSection = ModelSection()
    train: TrainSection = TrainSection()
    search: SearchSection = SearchSection()
    grid: GridSection = GridSection()
    validation: ValidationSection = ValidationSection()

    def modulation_for(self, bits_out: int) -> str:
        if self.signal.modulation is not None:
            return self.signal.modulation
        return next(m for m, b in MODULATION_BITS.items() if b == bits_out)


def _format_errors(err: ValidationError, source: str) -> str:
    lines = [f"invalid configuration in {source}:"]
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"  {loc}: {e['msg']}")
    return "\n".join(lines)


def parse_config(data: dict | None, source: str = "<dict>") -> Config:
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a mapping, got {type(data).__name__}")
    try:
        return Config.model_validate(data)
    except ValidationError as err:
        raise ConfigError(_format_errors(err, source)) from None


def load_config(path: str | Path | None) -> Config:
    if path is None:
        return Config()
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ConfigError(f"{path}: not valid YAML/JSON: {err}") from None
    return parse_config(data, str(path))


def apply_overrides(cfg: Config, overrides: dict) -> Config:
    """Apply dotted-key overrides (``{"search.episodes": 3}``) and revalidate."""
    data = cfg.model_dump(mode="json")
    for key, value in overrides.items():
        node = data
        parts = key.split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        node[parts[-1]] = value
    return parse_config(data, "overrides")
