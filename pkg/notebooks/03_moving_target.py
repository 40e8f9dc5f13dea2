"""Tracking a moving density with PHPIP.

The density peak parks at (0.45, 0.45), slides to (1.95, 1.35) between
t = 300 and t = 700, then parks again.  For every step we compare the
achieved potential with the exact optimum for that step's density and
print the across-seed median ratio in 100-step windows.

Run with ``python3 notebooks/03_moving_target.py [threads]``.
"""

import sys
from pathlib import Path

import numpy as np

from pipip.harness import optimum_series, preset, read_trace, run_experiment

threads = int(sys.argv[1]) if len(sys.argv) > 1 else 1
out = Path("runs/experiment2")
config = preset("experiment2")
run_experiment(config, threads=threads, out_dir=out)

optimum, method = optimum_series(config)
ratios = np.array([read_trace(out / f"seed_{s:04d}.csv")["phi"] / optimum for s in config.seeds])
median = np.median(ratios, axis=0)
t = np.arange(1, config.horizon + 1)

print(f"optimum method: {method}")
for lo in range(0, config.horizon, 100):
    window = (t > lo) & (t <= lo + 100)
    print(f"t {lo + 1:4d}-{lo + 100:4d}: median ratio {np.median(median[window]):.3f}")
print(f"overall (t > 100): {np.median(median[t > 100]):.3f}")
