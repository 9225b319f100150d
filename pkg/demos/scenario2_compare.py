"""Time-varying user counts: compare schemes over a few seeds.

Run with ``python3 demos/scenario2_compare.py [seeds]``, e.g. ``0,1,2``.
Per-slot CSVs and a summary land in ``demos/out/``.
"""

import sys
from pathlib import Path

from slicebde.config import builtin_scenario
from slicebde.harness import compare

seeds = [int(s) for s in (sys.argv[1] if len(sys.argv) > 1 else "0").split(",")]
out = Path(__file__).parent / "out"
sc = builtin_scenario("scenario2")
for row in compare(sc, ["rl", "vucb1", "noadapt"], seeds, out):
    print(f"{row['scheme']:8s} cost {row['cumulative_cost_mean']:10.0f} +- {row['cumulative_cost_std']:8.0f}"
          f"  PRBs {row['avg_bandwidth_mean']:6.2f}  QoS ok {row['qos_success_mean']:.3f}")
print(f"CSVs written to {out}")
