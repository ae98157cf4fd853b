"""
The neural receiver: build, train briefly, compare, save
========================================================

A residual CNN reads six planes (received grid, pilot grid and LS estimate,
real and imaginary parts) and emits one LLR per bit. This script trains the
PTLC preset for a few hundred steps, which is enough to see it learn but far
short of the desk budget used by the test suite (3000 steps). Pass a step
count as the first argument to train longer.

The trained weights go to ``demos/out/ptlc.npz`` for the next demos.
"""
import sys
from pathlib import Path

import numpy as np

from rxprobe.linksim import ScenarioParams, SignalConfig
from rxprobe.pipeline import DualReceiver
from rxprobe.receivers import build_model
from rxprobe.receivers.io import load_model, save_model
from rxprobe.receivers.training import TrainBudget, train

steps = int(sys.argv[1]) if len(sys.argv) > 1 else 300
out = Path(__file__).parent / "out" / "ptlc.npz"

# %% Three presets, two sizes
for name in ("PTLC", "FTLC", "FTHC", "FTHC-desk"):
    print(f"{name:10s} {build_model(name).n_params:8,d} parameters")

# %% Train PTLC: 16QAM, TDL-D, extreme delay spreads and speeds only
model = build_model("PTLC")
result = train(model, "PTLC", TrainBudget(n_steps=steps, batch=16, log_every=0))
print(f"\n{steps} steps in {result.seconds:.0f} s, loss {np.mean(result.losses[:20]):.3f} -> "
      f"{np.mean(result.losses[-20:]):.3f}")

# %% Compare with the classical receiver on the same realizations
pair = DualReceiver(model, SignalConfig(modulation="16QAM"))
print("\nSNR  speed  delay   BER classical  BER neural")
for snr, speed, ds in [(8, 1, 10), (8, 10, 150), (20, 1, 10), (20, 10, 150)]:
    bt, ba = pair.large_sample(ScenarioParams(speed, ds, -snr), seed=7, n_realizations=50)
    print(f"{snr:3d}  {speed:5d}  {ds:5d}   {bt:13.4f}  {ba:10.4f}")

# %% Save and reload: the weights come back bit for bit
save_model(out, model, result.manifest())
again, header = load_model(out)
print("\nsaved", out, "| identical after reload:",
      all(np.array_equal(a.data, b.data) for a, b in zip(model.params, again.params)))
