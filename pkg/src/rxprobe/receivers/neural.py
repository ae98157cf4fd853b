"""Fully convolutional residual receiver mapping (S_r, S_p, H_r) to bit LLRs."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..autodiff import ops
from ..autodiff.tensor import Tensor, as_tensor

N_FEATURES = 6


@dataclass(frozen=True)
class ModelConfig:
    n_resblocks: int = 5
    width: int = 24
    bits_out: int = 4
    kernel: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.n_resblocks < 1:
            raise ValueError("n_resblocks must be >= 1")
        if self.bits_out not in (2, 4, 6):
            raise ValueError(f"bits_out must be 2, 4 or 6, got {self.bits_out}")
        if self.width < 1 or self.kernel % 2 == 0:
            raise ValueError("width must be positive and kernel odd")

    def to_dict(self) -> dict:
        return asdict(self)


# 58k-parameter and 700k-parameter targets of the reference receiver
MODEL_PRESETS = {
    "PTLC": ModelConfig(n_resblocks=5, width=24, bits_out=4),
    "FTLC": ModelConfig(n_resblocks=5, width=24, bits_out=6),
    "FTHC": ModelConfig(n_resblocks=11, width=59, bits_out=6),
    # same depth, reduced width, for CPU-bound test runs
    "FTHC-desk": ModelConfig(n_resblocks=11, width=16, bits_out=6),
}

PARAM_TARGETS = {"PTLC": 58_000, "FTLC": 58_000, "FTHC": 700_000}


def plane_index(bits_per_symbol: int, bits_out: int) -> np.ndarray:
    """Output planes used for a modulation with ``bits_per_symbol`` bits.

    Planes are laid out as [I bits..., Q bits...] with bits_out/2 per axis,
    so lower orders use the leading planes of each axis.
    """
    if bits_per_symbol > bits_out:
        raise ValueError(f"model emits {bits_out} bits, modulation needs {bits_per_symbol}")
    half, k = bits_out // 2, bits_per_symbol // 2
    return np.concatenate([np.arange(k), half + np.arange(k)])


class NeuralReceiver:
    """Input conv, residual blocks (conv-ReLU-conv + skip), output conv."""

    def __init__(self, config: ModelConfig):
        self.config = config
        rng = np.random.default_rng(config.seed)
        k, c = config.kernel, config.width

        def conv(cin, cout, gain=1.0):
            std = gain * np.sqrt(2.0 / (k * k * cin))
            return (Tensor(rng.standard_normal((k, k, cin, cout)) * std, requires_grad=True),
                    Tensor(np.zeros(cout), requires_grad=True))

        self.layers: list[tuple[Tensor, Tensor]] = [conv(N_FEATURES, c)]
        for _ in range(config.n_resblocks):
            self.layers.append(conv(c, c))
            self.layers.append(conv(c, c, gain=0.1))
        self.layers.append(conv(c, config.bits_out, gain=0.5))

    @property
    def params(self) -> list[Tensor]:
        return [t for pair in self.layers for t in pair]

    @property
    def n_params(self) -> int:
        return sum(p.size for p in self.params)

    def set_trainable(self, flag: bool) -> None:
        for p in self.params:
            p.requires_grad = flag

    def features(self, rx, pilots, h_ls) -> Tensor:
        rx, h_ls = as_tensor(rx), as_tensor(h_ls)
        if rx.ndim != 3 or h_ls.shape != rx.shape or np.shape(pilots) != rx.shape[1:]:
            raise ValueError(f"input grids disagree: S_r {rx.shape}, S_p {np.shape(pilots)}, "
                             f"H_r {h_ls.shape}")
        sp = np.broadcast_to(np.asarray(pilots), rx.shape)
        planes = [ops.real(rx), ops.imag(rx), Tensor(sp.real), Tensor(sp.imag),
                  ops.real(h_ls), ops.imag(h_ls)]
        return ops.stack(planes, axis=-1)

    def forward(self, rx, pilots, h_ls, precision: str = "float64") -> Tensor:
        """LLRs of shape (batch, symbols, subcarriers, bits_out)."""
        x = ops.conv2d(self.features(rx, pilots, h_ls), *self.layers[0], precision=precision)
        for i in range(self.config.n_resblocks):
            w1, w2 = self.layers[1 + 2 * i], self.layers[2 + 2 * i]
            y = ops.conv2d(ops.relu(x), *w1, precision=precision)
            x = x + ops.conv2d(ops.relu(y), *w2, precision=precision)
        return ops.conv2d(ops.relu(x), *self.layers[-1], precision=precision)

    __call__ = forward

    def llr_for(self, llr: Tensor, bits_per_symbol: int) -> Tensor:
        """Select the planes that carry a given modulation's bits."""
        if bits_per_symbol == self.config.bits_out:
            return llr
        return llr[..., plane_index(bits_per_symbol, self.config.bits_out)]


def build_model(config: ModelConfig | str) -> NeuralReceiver:
    if isinstance(config, str):
        config = MODEL_PRESETS[config]
    return NeuralReceiver(config)
