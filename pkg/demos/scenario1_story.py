"""Ten users with a constant offered load: watch the estimator settle on 25 PRBs.

Run with ``python3 demos/scenario1_story.py``.
"""

from slicebde.config import builtin_scenario
from slicebde.harness import run

sc = builtin_scenario("scenario1")
reports = {s: run(sc, s) for s in ("rl", "vucb1", "noadapt", "mc")}

rl = reports["rl"]
actions = rl.column("action")
print("rl allocations, 25 slots per line:")
for i in range(0, len(actions), 25):
    print(f"  {i:3d}: " + " ".join(f"{w:2d}" for w in actions[i:i + 25]))

print("\nscheme    cum.cost  avg PRBs  QoS ok  (last 100: PRBs, QoS ok)")
for name, rep in reports.items():
    a, tail = rep.aggregates, rep.window(100)
    print(f"{name:8s} {a.cumulative_cost:9.0f} {a.avg_bandwidth:9.2f} {a.qos_success:7.3f}"
          f"  ({tail.avg_bandwidth:.2f}, {tail.qos_success:.3f})")
