"""LS channel estimation, scalar LMMSE equalization and QAM demapping.

LLR sign convention everywhere: positive means bit 0 is more likely.
"""
from __future__ import annotations

import numpy as np

from ..autodiff import ops
from ..autodiff.tensor import Tensor, as_tensor
from ..linksim.modulation import axis_table

LLR_MAX = 20.0


def interpolation_matrix(positions, n: int) -> np.ndarray:
    """(n, len(positions)) linear interpolation with edge hold."""
    positions = np.asarray(sorted(positions), dtype=float)
    a = np.zeros((n, len(positions)))
    for i in range(n):
        if i <= positions[0]:
            a[i, 0] = 1.0
        elif i >= positions[-1]:
            a[i, -1] = 1.0
        else:
            k = np.searchsorted(positions, i, side="right") - 1
            w = (i - positions[k]) / (positions[k + 1] - positions[k])
            a[i, k], a[i, k + 1] = 1.0 - w, w
    return a


def ls_estimate(rx, pilots: np.ndarray, pilot_mask: np.ndarray) -> Tensor:
    """Least-squares estimate at the pilots, interpolated over the grid.

    Within each pilot symbol the estimate is interpolated linearly across
    subcarriers; across symbols it is linear between pilot symbols and held
    constant beyond the first and last one.
    """
    rx = as_tensor(rx)
    pilots = np.asarray(pilots)
    pilot_mask = np.asarray(pilot_mask, dtype=bool)
    if pilot_mask.shape != pilots.shape or np.any((pilots != 0) & ~pilot_mask):
        raise ValueError("pilot mask does not match the pilot grid support")
    if np.any(np.abs(pilots[pilot_mask]) < 1e-9):
        raise ValueError("pilot with magnitude below 1e-9")
    n_sym, n_sc = pilot_mask.shape
    rows = np.flatnonzero(pilot_mask.any(axis=1))
    per_row = []
    for r in rows:
        cols = np.flatnonzero(pilot_mask[r])
        h_p = rx[:, r, cols] / pilots[r, cols]  # (B, n_cols)
        if len(cols) == n_sc:
            per_row.append(h_p)
        else:
            per_row.append(ops.matmul(h_p, interpolation_matrix(cols, n_sc).T))
    h_rows = ops.stack(per_row, axis=1)  # (B, n_rows, F)
    return ops.matmul(interpolation_matrix(rows, n_sym), h_rows)


def lmmse_equalize(rx, h_hat, noise_var, unbiased: bool = False) -> tuple[Tensor, Tensor]:
    """Scalar MMSE equalizer.

    Default (biased) form: x = conj(h) y / (|h|^2 + s2), s2_eff = s2 / (|h|^2 + s2).
    With ``unbiased`` the estimate is rescaled by (|h|^2 + s2) / |h|^2, giving
    x = y / h and s2_eff = s2 / |h|^2, which is what a QAM demapper expects.
    """
    rx, h_hat, noise_var = as_tensor(rx), as_tensor(h_hat), as_tensor(noise_var)
    if np.any(noise_var.data < 0):
        raise ValueError("noise variance must be non-negative")
    gain = ops.abs2(h_hat)
    if unbiased:
        gain = gain + 1e-12
        return rx * ops.conj(h_hat) / gain, noise_var / gain
    den = gain + noise_var + 1e-12
    return rx * ops.conj(h_hat) / den, noise_var / den


def demap_llr(x_hat, modulation: str, noise_eff, method: str = "maxlog",
              llr_max: float = LLR_MAX) -> Tensor:
    """Per-bit LLRs with shape x_hat.shape + (bits_per_symbol,), I bits first."""
    x_hat, noise_eff = as_tensor(x_hat), as_tensor(noise_eff)
    if np.any(noise_eff.data <= 0):
        raise ValueError("effective noise variance must be positive")
    if method not in ("maxlog", "exact"):
        raise ValueError(f"unknown demapping method {method!r}")
    levels, labels = axis_table(modulation)
    inv = 1.0 / noise_eff
    llrs = []
    for axis in (ops.real(x_hat), ops.imag(x_hat)):
        dist = (axis.reshape(*axis.shape, 1) - levels) ** 2  # (..., L)
        for k in range(labels.shape[1]):
            one = np.flatnonzero(labels[:, k] == 1)
            zero = np.flatnonzero(labels[:, k] == 0)
            if method == "maxlog":
                d1 = ops.amin(dist[..., one], axis=-1)
                d0 = ops.amin(dist[..., zero], axis=-1)
                llrs.append((d1 - d0) * inv)
            else:
                # ln sum exp(-d/s) over bit-0 points minus over bit-1 points
                scaled = -dist * inv.reshape(*inv.shape, 1)
                llrs.append(ops.logsumexp(scaled[..., zero], axis=-1)
                            - ops.logsumexp(scaled[..., one], axis=-1))
    return ops.clip(ops.stack(llrs, axis=-1), -llr_max, llr_max)


def _masked(llr: Tensor, bits: np.ndarray, data_mask) -> tuple[Tensor, np.ndarray]:
    bits = np.asarray(bits)
    if llr.shape != bits.shape:
        raise ValueError(f"LLR shape {llr.shape} does not match bit shape {bits.shape}")
    mask = np.asarray(data_mask, dtype=bool)
    if not mask.any():
        raise ValueError("empty data mask")
    return llr[:, mask], bits[:, mask]


def hard_ber(llr, bits: np.ndarray, data_mask) -> float:
    """Fraction of data bits whose sign decision (LLR < 0 means 1) is wrong."""
    llr, b = _masked(as_tensor(llr).detach(), bits, data_mask)
    decided = (llr.data < 0).astype(np.int8)
    return float(np.mean(decided != b))


def hard_errors(llr, bits: np.ndarray, data_mask) -> tuple[int, int]:
    llr, b = _masked(as_tensor(llr).detach(), bits, data_mask)
    return int(np.sum((llr.data < 0).astype(np.int8) != b)), int(b.size)


def soft_ber(llr, bits: np.ndarray, data_mask) -> Tensor:
    """Mean model-implied error probability sigmoid(-(1 - 2b) LLR) over data bits."""
    llr, b = _masked(as_tensor(llr), bits, data_mask)
    return ops.mean(ops.sigmoid(llr * -(1.0 - 2.0 * b)))


def classical_receiver(rx, pilots, pilot_mask, noise_var, modulation: str,
                       method: str = "maxlog", unbiased: bool = True) -> tuple[Tensor, Tensor]:
    """LS -> LMMSE -> demapper; returns (LLR grid, LS channel estimate)."""
    h_ls = ls_estimate(rx, pilots, pilot_mask)
    x_hat, no_eff = lmmse_equalize(rx, h_ls, noise_var, unbiased=unbiased)
    return demap_llr(x_hat, modulation, no_eff, method=method), h_ls
