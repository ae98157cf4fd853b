"""Reparameterized TDL fading channel applied per OFDM symbol and subcarrier.

All randomness lives in :class:`ChannelRealization`; scenario parameters only
enter :func:`apply_channel`, which is a smooth function of them::

    H(t, f) = sum_p sqrt(P_p) g_p(t) exp(-j 2 pi f_sc(f) x_d tau_p)
    g_p(t)  = N^-1/2 sum_n c_pn exp(j 2 pi f_D cos(a_pn) t),  f_D = x_s f_c / c
    S_r     = H * S_t + 10^(x_n / 20) * w
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import seeding
from ..autodiff import ops
from ..autodiff.tensor import Tensor, as_tensor
from .config import SPEED_OF_LIGHT, ScenarioParams, SignalConfig
from .profiles import ChannelProfile, get_profile


@dataclass(frozen=True)
class ChannelRealization:
    seed: int
    profile: str
    gains: np.ndarray  # (B, taps, N) unit-variance complex Gaussian
    doppler_cos: np.ndarray  # (B, taps, N) cosine of arrival angle
    los_phase: np.ndarray  # (B,)
    los_cos: np.ndarray  # (B,)
    noise: np.ndarray  # (B, T, F) unit-variance complex Gaussian

    @property
    def batch(self) -> int:
        return self.gains.shape[0]

    @property
    def n_sinusoids(self) -> int:
        return self.gains.shape[-1]


def _cn(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def sample_realization(seed: int, batch: int, profile: str | ChannelProfile = "TDL-D",
                       n_sinusoids: int = 16, config: SignalConfig | None = None,
                       first_item: int = 0) -> ChannelRealization:
    """Draw everything random about ``batch`` channel uses.

    Item ``i`` is drawn from its own stream ``(seed, i)``, so it does not
    change when the batch grows or is split into chunks (``first_item``).
    """
    if n_sinusoids < 8:
        raise ValueError(f"n_sinusoids must be >= 8, got {n_sinusoids}")
    if batch < 1:
        raise ValueError("batch must be >= 1")
    config = config or SignalConfig()
    prof = profile if isinstance(profile, ChannelProfile) else get_profile(profile)
    p, n = prof.n_diffuse, n_sinusoids
    t, f = config.grid_shape
    gains = np.empty((batch, p, n), dtype=np.complex128)
    dcos = np.empty((batch, p, n))
    los_phase = np.empty(batch)
    los_cos = np.empty(batch)
    noise = np.empty((batch, t, f), dtype=np.complex128)
    for b in range(batch):
        g = seeding.rng(seed, seeding.STREAM_CHANNEL, first_item + b)
        gains[b] = _cn(g, (p, n))
        dcos[b] = np.cos(g.uniform(0.0, 2.0 * np.pi, (p, n)))
        los_phase[b] = g.uniform(0.0, 2.0 * np.pi)
        los_cos[b] = np.cos(g.uniform(0.0, 2.0 * np.pi))
        noise[b] = _cn(g, (t, f))
    return ChannelRealization(int(seed), prof.name, gains, dcos, los_phase, los_cos, noise)


def _per_item(value, batch: int, ndim: int) -> Tensor:
    v = as_tensor(value)
    if v.ndim == 0:
        return v.reshape((1,) * ndim)
    if v.shape != (batch,):
        raise ValueError(f"scenario parameter shape {v.shape} is neither scalar nor ({batch},)")
    return v.reshape((batch,) + (1,) * (ndim - 1))


def tap_gains(real: ChannelRealization, speed, profile: ChannelProfile, config: SignalConfig) -> Tensor:
    """Power-weighted tap processes g_p(t), shape (B, P, T), differentiable in speed."""
    b = real.batch
    t = np.arange(config.n_symbols) * config.symbol_duration
    omega = 2.0 * np.pi * config.carrier_frequency / SPEED_OF_LIGHT  # rad/s per m/s

    speed4 = _per_item(speed, b, 4)
    k_diffuse = omega * real.doppler_cos[..., None] * t  # (B, P, N, T)
    rot = ops.cis(speed4 * k_diffuse)
    taps = ops.tsum(rot * (real.gains[..., None] / np.sqrt(real.n_sinusoids)), axis=2)
    if profile.los:
        speed2 = _per_item(speed, b, 2)
        los = ops.cis(real.los_phase[:, None] + speed2 * (omega * real.los_cos[:, None] * t))
        taps = ops.concat([los.reshape(b, 1, -1), taps], axis=1)
    return taps * np.sqrt(np.asarray(profile.powers))[None, :, None]


def channel_response(real: ChannelRealization, params: ScenarioParams,
                     profile: ChannelProfile, config: SignalConfig) -> Tensor:
    """Frequency response H of shape (B, T, F), differentiable in speed and delay spread."""
    if real.profile != profile.name:
        raise ValueError(f"realization drawn for {real.profile}, applied with {profile.name}")
    taps = tap_gains(real, params.speed, profile, config)
    f = config.n_subcarriers
    fsc = (np.arange(f) - (f - 1) / 2.0) * config.subcarrier_spacing
    kd = -2.0 * np.pi * 1e-9 * np.outer(profile.delays, fsc)  # (P, F) rad per ns
    delay3 = _per_item(params.delay_spread, real.batch, 3)
    ramp = ops.cis(delay3 * kd)  # (B, P, F)
    return ops.matmul(ops.transpose(taps, (0, 2, 1)), ramp)


def noise_std(noise_power) -> Tensor:
    return ops.exp(as_tensor(noise_power) * (np.log(10.0) / 20.0))


def apply_channel(tx, real: ChannelRealization, params: ScenarioParams,
                  profile: str | ChannelProfile = "TDL-D",
                  config: SignalConfig | None = None) -> tuple[Tensor, Tensor]:
    """Return the received grid S_r and the true channel H."""
    config = config or SignalConfig()
    prof = profile if isinstance(profile, ChannelProfile) else get_profile(profile)
    params.check()
    tx = as_tensor(tx)
    if tx.shape != (real.batch, *config.grid_shape):
        raise ValueError(f"tx grid shape {tx.shape} does not match realization batch "
                         f"{real.batch} and grid {config.grid_shape}")
    h = channel_response(real, params, prof, config)
    sigma = _per_item(noise_std(params.noise_power), real.batch, 3)
    rx = h * tx + sigma * real.noise
    return rx, h
