"""Payload generation and resource-grid assembly."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .. import seeding
from .config import SignalConfig
from .modulation import map_symbols

PILOT_SEED = 0x5EED


def generate_payload(seed: int, config: SignalConfig, batch: int, first_item: int = 0) -> np.ndarray:
    """Uniform bits, shape (batch, n_data_re * bits_per_symbol), one stream per item."""
    if batch < 1:
        raise ValueError("batch must be >= 1")
    n = config.n_data_re * config.bits_per_symbol
    out = np.empty((batch, n), dtype=np.int8)
    for b in range(batch):
        out[b] = seeding.rng(seed, seeding.STREAM_PAYLOAD, first_item + b).integers(0, 2, n)
    return out


@lru_cache(maxsize=8)
def _pilot_template(n_symbols: int, n_subcarriers: int, pilot_symbols: tuple[int, ...]) -> np.ndarray:
    g = seeding.rng(PILOT_SEED, seeding.STREAM_PILOTS)
    grid = np.zeros((n_symbols, n_subcarriers), dtype=np.complex128)
    bits = g.integers(0, 2, (len(pilot_symbols), 2 * n_subcarriers))
    grid[list(pilot_symbols), :] = map_symbols(bits, "QPSK")
    grid.setflags(write=False)
    return grid


def pilot_grid(config: SignalConfig) -> np.ndarray:
    """Known QPSK pilots on every subcarrier of the pilot symbols, zeros elsewhere."""
    return _pilot_template(config.n_symbols, config.n_subcarriers, config.pilot_symbols)


def build_grid(symbols: np.ndarray, config: SignalConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Place data symbols (batch, n_data_re) around the pilots.

    Returns (tx grid (B, T, F), pilot grid (T, F), pilot mask (T, F)).
    """
    symbols = np.asarray(symbols)
    if symbols.ndim != 2 or symbols.shape[1] != config.n_data_re:
        raise ValueError(f"expected symbols of shape (batch, {config.n_data_re}), got {symbols.shape}")
    pilots = pilot_grid(config)
    mask = config.pilot_mask
    tx = np.broadcast_to(pilots, (symbols.shape[0], *config.grid_shape)).copy()
    tx[:, ~mask] = symbols
    return tx, pilots, mask


def bits_to_grid(bits: np.ndarray, config: SignalConfig) -> np.ndarray:
    """Reshape payload bits to (B, T, F, m) with zeros on pilot REs."""
    m = config.bits_per_symbol
    b = bits.shape[0]
    out = np.zeros((b, *config.grid_shape, m), dtype=np.int8)
    out[:, config.data_mask, :] = bits.reshape(b, config.n_data_re, m)
    return out


def transmit_batch(seed: int, config: SignalConfig, batch: int, first_item: int = 0):
    """Bits (B,T,F,m), tx grid, pilot grid and pilot mask for one batch."""
    bits = generate_payload(seed, config, batch, first_item)
    symbols = map_symbols(bits, config.modulation)
    tx, pilots, mask = build_grid(symbols, config)
    return bits_to_grid(bits, config), tx, pilots, mask
