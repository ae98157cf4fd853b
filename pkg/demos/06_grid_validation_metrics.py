"""
Grid baseline, large-sample validation and the efficiency metrics
=================================================================

A coarse grid sweeps the same scenario box; every flagged point and every
search end point is re-evaluated over many fresh realizations to decide
whether the failure is real. Counts then turn into accuracy, precision,
recall and tests per validated failure. The cost model shows why grids stop
scaling as parameters are added.

Usage: python demos/06_grid_validation_metrics.py [model.npz]
"""
import sys
from pathlib import Path

from rxprobe.baseline import (
    CostModelInput,
    GridSpec,
    LabelledConfig,
    compute_metrics,
    cost_model,
    run_grid,
    tests_per_failure,
    validate_configs,
)
from rxprobe.linksim import SignalConfig
from rxprobe.pipeline import DualReceiver
from rxprobe.receivers.io import load_model

path = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent / "out" / "ptlc.npz"
if not path.exists():
    sys.exit(f"{path} not found; run demos/04_neural_receiver.py first")
model, _ = load_model(path)
objective = DualReceiver(model, SignalConfig(modulation="16QAM"))

# %% A 4 x 3 x 4 grid, 25 realizations per point
spec = GridSpec.reduced(4, 3, 4)
grid = run_grid(objective, spec, batch=25, threshold=1.0)
flagged = [g for g in grid if g.failed]
print(f"grid: {spec.total} points, {len(flagged)} flagged")
for g in flagged:
    print(f"   {g.speed:5.1f} m/s {g.delay_spread:5.0f} ns {g.snr:5.1f} dB  BER_t {g.ber_t:.4f}  BER_AI {g.ber_ai:.4f}")

# %% Re-evaluate the flagged points over 200 realizations
configs = [LabelledConfig(g.id, "FailSearch", g.speed, g.delay_spread, g.snr) for g in flagged]
result = validate_configs(lambda p, s, n: objective.large_sample(p, s, n), configs, 200, (1.0,))
confirmed = result.validated_failures(1.0)
print(f"validated: {len(confirmed)} of {len(flagged)}; metrics {compute_metrics(result.counts(1.0))}")
print(f"tests per validated failure: {tests_per_failure(spec.total, len(confirmed)):.1f}")

# %% How many tests each approach needs as dimensions grow (10 points per axis)
print("\n d   grid tests   gradient tests (100 episodes x 100 iterations)")
for d in range(1, 8):
    c = cost_model(CostModelInput((10,), 100, 100, 1.0, d))
    print(f"{d:2d}  {c['grid_tests']:11,.0f}   {c['gradient_tests']:,.0f}")
