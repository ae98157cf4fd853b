"""Square Gray-mapped QAM.

Convention (frozen): each axis carries half of the bits, MSB first, I bits
before Q bits. Per axis the amplitude of bits ``c0 c1 ... c_{k-1}`` is
``(1-2c0) * (2^{k-1} - (1-2c1) * (2^{k-2} - ... ))``, which is Gray coded and
maps an all-zero label to the innermost positive level. QPSK ``00`` maps to
``(1+1j)/sqrt(2)``.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .config import bits_per_symbol


def _axis_amplitude(bits: np.ndarray) -> np.ndarray:
    k = bits.shape[-1]
    amp = np.ones(bits.shape[:-1])
    for j in range(k - 1, 0, -1):
        amp = 2.0 ** (k - j) - (1 - 2 * bits[..., j]) * amp
    return (1 - 2 * bits[..., 0]) * amp


@lru_cache(maxsize=None)
def axis_table(modulation: str) -> tuple[np.ndarray, np.ndarray]:
    """Normalized per-axis levels (L,) and their bit labels (L, m/2)."""
    m = bits_per_symbol(modulation)
    k = m // 2
    labels = ((np.arange(2**k)[:, None] >> np.arange(k - 1, -1, -1)) & 1).astype(np.int8)
    levels = _axis_amplitude(labels) / _norm(modulation)
    levels.setflags(write=False)
    labels.setflags(write=False)
    return levels, labels


def _norm(modulation: str) -> float:
    order = 2 ** bits_per_symbol(modulation)
    return float(np.sqrt(2.0 * (order - 1) / 3.0))


@lru_cache(maxsize=None)
def constellation(modulation: str) -> tuple[np.ndarray, np.ndarray]:
    """All points (M,) with bit labels (M, m), I bits first."""
    levels, labels = axis_table(modulation)
    n = len(levels)
    ii, qq = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    points = (levels[ii] + 1j * levels[qq]).reshape(-1)
    bits = np.concatenate([labels[ii.reshape(-1)], labels[qq.reshape(-1)]], axis=1)
    points.setflags(write=False)
    bits.setflags(write=False)
    return points, bits


def map_symbols(bits: np.ndarray, modulation: str) -> np.ndarray:
    """Map the last axis of ``bits`` (length divisible by m) to symbols."""
    m = bits_per_symbol(modulation)
    bits = np.asarray(bits)
    if bits.shape[-1] % m:
        raise ValueError(f"map_symbols: {bits.shape[-1]} bits not divisible by {m} for {modulation}")
    groups = bits.reshape(*bits.shape[:-1], bits.shape[-1] // m, m).astype(np.int64)
    k = m // 2
    norm = _norm(modulation)
    return (_axis_amplitude(groups[..., :k]) + 1j * _axis_amplitude(groups[..., k:])) / norm


def demap_nearest(symbols: np.ndarray, modulation: str) -> np.ndarray:
    """Hard ML decision; returns bits with the symbol axis flattened into the last axis."""
    points, labels = constellation(modulation)
    symbols = np.asarray(symbols)
    idx = np.argmin(np.abs(symbols[..., None] - points) ** 2, axis=-1)
    out = labels[idx]
    return out.reshape(*symbols.shape[:-1], symbols.shape[-1] * labels.shape[1])
