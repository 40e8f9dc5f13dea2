"""Static coverage: PHPIP against DISL on the obstacle world.

Both arms share the world, the seeds and the horizon; only the learning
rule changes.  Traces land in ``runs/experiment1/<arm>`` and the final
table is the same one ``pipip analyze`` prints.

Run with ``python3 notebooks/02_static_coverage.py [threads]``.
"""

import sys
from pathlib import Path

from pipip.harness import aggregate, preset, run_experiment

threads = int(sys.argv[1]) if len(sys.argv) > 1 else 1
root = Path("runs/experiment1")
config = preset("experiment1")

arms = {}
for algorithm in ("PHPIP", "DISL"):
    arms[algorithm] = run_experiment(config.replace(algorithm=algorithm), threads=threads, out_dir=root / algorithm)

print(f"optimum {arms['PHPIP'][0].optimum:.4f} ({arms['PHPIP'][0].optimum_method})")
for line in aggregate(arms).lines():
    print(line)

# The eps = 0.3 variant makes the exploration-level trade-off visible.
hot = run_experiment(preset("experiment1-eps0.3"), threads=threads, out_dir=root / "PHPIP-eps0.3")
print()
for line in aggregate({"PHPIP eps=0.3": hot, "DISL": arms["DISL"]}).lines():
    print(line)
