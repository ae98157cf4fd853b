"""Differentiable transmitter and fading channel."""
from .channel import (
    ChannelRealization,
    apply_channel,
    channel_response,
    noise_std,
    sample_realization,
    tap_gains,
)
from .config import PARAM_LIMITS, ScenarioParams, SignalConfig, bits_per_symbol
from .grid import bits_to_grid, build_grid, generate_payload, pilot_grid, transmit_batch
from .modulation import axis_table, constellation, demap_nearest, map_symbols
from .profiles import ChannelProfile, get_profile, load_profiles

__all__ = [
    "PARAM_LIMITS",
    "ChannelProfile",
    "ChannelRealization",
    "ScenarioParams",
    "SignalConfig",
    "apply_channel",
    "axis_table",
    "bits_per_symbol",
    "bits_to_grid",
    "build_grid",
    "channel_response",
    "constellation",
    "demap_nearest",
    "generate_payload",
    "get_profile",
    "load_profiles",
    "map_symbols",
    "noise_std",
    "pilot_grid",
    "sample_realization",
    "tap_gains",
    "transmit_batch",
]
