"""
Gradient-guided search for scenarios where the neural receiver loses
====================================================================

Each episode starts on a coarse lattice of (speed, delay spread, SNR), then
lets Adam move the MinMax-normalised scenario to shrink soft_t - soft_ai, the
margin of the classical receiver over the neural one. It stops as soon as
BER_t / BER_AI <= T, on a loss plateau, or after ``max_iters`` evaluations.

Usage: python demos/05_failure_search.py [model.npz] [episodes]
"""
import sys
from pathlib import Path

from rxprobe.linksim import SignalConfig
from rxprobe.pipeline import DualReceiver
from rxprobe.receivers.io import load_model
from rxprobe.search import SearchConfig, SearchSpace, run_campaign

path = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent / "out" / "ptlc.npz"
episodes = int(sys.argv[2]) if len(sys.argv) > 2 else 3
if not path.exists():
    sys.exit(f"{path} not found; run demos/04_neural_receiver.py first")
model, header = load_model(path)

objective = DualReceiver(model, SignalConfig(modulation="16QAM"))
space = SearchSpace.from_bounds(speed=(0, 30), delay_spread=(10, 400), snr=(0, 22))
config = SearchConfig(n_episodes=episodes, max_iters=40, batch=25, threshold=1.0, seed=0)

# %% Run a few episodes and print each trajectory's start and end
result = run_campaign(objective, space, config)
for rec in result.records:
    first, last = rec.trace[0], rec.final
    fmt = lambda s: f"{s['speed']:5.1f} m/s {s['delay_spread']:5.0f} ns {s['snr']:5.1f} dB"  # noqa: E731
    print(f"episode {rec.episode}: {rec.outcome:10s} ({rec.stop_reason}, {rec.iterations} evaluations)")
    print(f"   start {fmt(first.scenario)}  ratio {first.ber_t / max(first.ber_ai, 1e-12):.2f}")
    print(f"   end   {fmt(last.scenario)}  ratio {last.ber_t / max(last.ber_ai, 1e-12):.2f}")
print(result.summary)
