"""
A differentiable OFDM link over a fading channel
================================================

The scenario is three numbers: terminal speed (m/s), delay spread (ns) and
noise power (dBm, unit signal power so SNR = -noise). Random draws live in a
``ChannelRealization``; with it fixed, the received grid is a smooth function
of the scenario and gradients flow back to all three values.
"""
import numpy as np

from rxprobe.autodiff import Tape, Tensor, ops
from rxprobe.linksim import (
    ScenarioParams,
    SignalConfig,
    apply_channel,
    channel_response,
    get_profile,
    sample_realization,
    transmit_batch,
)

cfg = SignalConfig(modulation="16QAM")
print(f"grid {cfg.n_symbols} symbols x {cfg.n_subcarriers} subcarriers, pilots on {cfg.pilot_symbols}")

# %% Transmit a batch and look at the channel
bits, tx, pilots, mask = transmit_batch(seed=1, config=cfg, batch=200)
real = sample_realization(seed=1, batch=200, profile="TDL-D", config=cfg)
profile = get_profile("TDL-D")
for speed, ds in [(0.0, 10.0), (30.0, 400.0)]:
    h = channel_response(real, ScenarioParams(speed, ds, -20.0), profile, cfg).data
    time_var = np.mean(np.abs(np.diff(h, axis=1)) ** 2)
    freq_var = np.mean(np.abs(np.diff(h, axis=2)) ** 2)
    print(f"speed {speed:4.0f} m/s, delay spread {ds:3.0f} ns: E|H|^2 = {np.mean(np.abs(h) ** 2):.3f}, "
          f"symbol-to-symbol change {time_var:.2e}, subcarrier-to-subcarrier change {freq_var:.2e}")

# %% Gradient of the received power w.r.t. the scenario
leaves = [Tensor(v, requires_grad=True) for v in (10.0, 150.0, -15.0)]
with Tape() as tape:
    rx, _ = apply_channel(tx[:8], sample_realization(1, 8, "TDL-D", config=cfg),
                          ScenarioParams(*leaves), "TDL-D", cfg)
    power = ops.mean(ops.abs2(rx))
tape.backward(power, wrt=leaves)
print("mean received power", power.item())
print("d power / d (speed, delay spread, noise dBm):", [float(leaf.grad) for leaf in leaves])
