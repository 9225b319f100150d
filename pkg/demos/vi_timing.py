"""Value-iteration wall time as the model grows (n MCS buckets x n queue buckets x n actions)."""

from slicebde.harness import bench_vi

for n in range(2, 11):
    print(f"n={n:2d}  mean {bench_vi(n, 5) * 1000:8.2f} ms")
