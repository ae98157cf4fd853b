"""Dual-receiver evaluation: one simulated batch, classical and neural BERs."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import seeding
from .autodiff import ops
from .autodiff.tensor import Tensor, as_tensor
from .linksim import ScenarioParams, SignalConfig, apply_channel, sample_realization, transmit_batch
from .linksim.channel import _per_item
from .linksim.profiles import ChannelProfile, get_profile
from .receivers.classic import classical_receiver, hard_errors, soft_ber
from .receivers.neural import NeuralReceiver


@dataclass
class PairEval:
    """Hard BERs (floats) and differentiable soft BERs for one batch."""

    ber_t: float
    ber_ai: float
    soft_t: Tensor
    soft_ai: Tensor
    errors_t: int
    errors_ai: int
    n_bits: int


class DualReceiver:
    """Simulate a batch at given scenario parameters and run both receivers."""

    def __init__(self, model: NeuralReceiver, config: SignalConfig | None = None,
                 profile: str | ChannelProfile = "TDL-D", n_sinusoids: int = 16,
                 demapper: str = "maxlog"):
        self.model = model
        self.config = config or SignalConfig()
        self.profile = profile if isinstance(profile, ChannelProfile) else get_profile(profile)
        self.n_sinusoids = n_sinusoids
        self.demapper = demapper

    def __call__(self, params: ScenarioParams, seed: int, batch: int, first_item: int = 0) -> PairEval:
        cfg = self.config
        bits, tx, pilots, mask = transmit_batch(seed, cfg, batch, first_item)
        real = sample_realization(seed, batch, self.profile, self.n_sinusoids, cfg, first_item)
        rx, _ = apply_channel(tx, real, params, self.profile, cfg)
        noise_var = _per_item(ops.exp(as_tensor(params.noise_power) * (np.log(10.0) / 10.0)), batch, 3)
        llr_t, h_ls = classical_receiver(rx, pilots, mask, noise_var, cfg.modulation,
                                         method=self.demapper)
        llr_ai = self.model.llr_for(self.model(rx, pilots, h_ls), cfg.bits_per_symbol)
        et, n = hard_errors(llr_t, bits, cfg.data_mask)
        ea, _ = hard_errors(llr_ai, bits, cfg.data_mask)
        return PairEval(et / n, ea / n, soft_ber(llr_t, bits, cfg.data_mask),
                        soft_ber(llr_ai, bits, cfg.data_mask), et, ea, n)

    def large_sample(self, params: ScenarioParams, seed: int, n_realizations: int,
                     chunk: int = 50) -> tuple[float, float]:
        """Pooled hard BERs over many realizations, evaluated in chunks."""
        et = ea = n = 0
        for start in range(0, n_realizations, chunk):
            size = min(chunk, n_realizations - start)
            res = self(params, seed, size, first_item=start)
            et += res.errors_t
            ea += res.errors_ai
            n += res.n_bits
        return et / n, ea / n


def evaluation_seed(root: int, stream: int, *path: int) -> int:
    return seeding.derive(root, stream, *path)
