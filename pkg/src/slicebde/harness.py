"""Closed-loop runs of a scheme against the simulator, with CSV reports."""

from __future__ import annotations

import csv
import io
import logging
import statistics
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .baselines import SchemeId, make_scheme
from .domain import ActionSet, CostParams
from .planner import value_iteration
from .sim import SliceSimulator

log = logging.getLogger(__name__)

COLUMNS = ("slot", "users", "x1", "avg_mcs", "x2", "queue_level", "x3", "queued_bytes",
           "action", "qos_ms", "violated", "cost")
SUMMARY_COLUMNS = ("scheme", "runs", "cumulative_cost_mean", "cumulative_cost_std",
                   "avg_bandwidth_mean", "avg_bandwidth_std", "qos_success_mean", "qos_success_std")

# stream ids under the master seed; the simulator owns 1 (traffic) and 2 (channel)
POLICY_STREAM = 3


class RunError(RuntimeError):
    pass


@dataclass(frozen=True)
class Aggregates:
    slots: int
    cumulative_cost: float
    avg_bandwidth: float
    qos_success: float
    per_x1: dict

    def as_dict(self) -> dict:
        return {"slots": self.slots, "cumulative_cost": self.cumulative_cost,
                "avg_bandwidth": self.avg_bandwidth, "qos_success": self.qos_success}


def aggregate(rows: Sequence[tuple]) -> Aggregates:
    """Summaries recomputed from per-slot rows only."""
    if not rows:
        return Aggregates(0, 0.0, 0.0, 0.0, {})
    i_w, i_v, i_c, i_x1 = (COLUMNS.index(k) for k in ("action", "violated", "cost", "x1"))
    n = len(rows)
    per_x1 = {}
    for x1 in sorted({r[i_x1] for r in rows}):
        sub = [r for r in rows if r[i_x1] == x1]
        per_x1[x1] = {"slots": len(sub),
                      "avg_bandwidth": sum(r[i_w] for r in sub) / len(sub),
                      "qos_success": sum(not r[i_v] for r in sub) / len(sub)}
    return Aggregates(
        slots=n,
        cumulative_cost=float(sum(r[i_c] for r in rows)),
        avg_bandwidth=sum(r[i_w] for r in rows) / n,
        qos_success=sum(not r[i_v] for r in rows) / n,
        per_x1=per_x1,
    )


@dataclass
class RunReport:
    scenario: str
    scheme: SchemeId
    seed: int
    rows: list

    @property
    def aggregates(self) -> Aggregates:
        return aggregate(self.rows)

    def window(self, last: int) -> Aggregates:
        return aggregate(self.rows[-last:])

    def column(self, name: str) -> list:
        i = COLUMNS.index(name)
        return [r[i] for r in self.rows]

    def cumulative_cost(self) -> np.ndarray:
        return np.cumsum(self.column("cost"))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in self.rows:
            writer.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv(), encoding="utf-8")
        return path


def _fmt(v):
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, float):
        return repr(v)
    return v


def run(scenario, scheme: SchemeId | str, seed: int | None = None, mc_warmup: bool = True) -> RunReport:
    scheme = SchemeId(scheme)
    seed = scenario.seed if seed is None else int(seed)
    env = SliceSimulator.from_scenario(scenario)
    controller = make_scheme(scheme, scenario.bde, np.random.default_rng([seed, POLICY_STREAM]), mc_warmup)
    obs = env.reset(seed)
    rows = []
    for t in range(scenario.slots):
        try:
            w = controller.decide(obs)
            fb, next_obs = env.step(w)
            rec = controller.feedback(fb.q_value)
        except Exception as exc:
            raise RunError(f"{scenario.name}/{scheme.value}/seed {seed}, slot {t}: {exc}") from exc
        s = rec.state
        rows.append((t, obs.active_users, s.x1, obs.avg_mcs, s.x2, obs.queue_level, s.x3, obs.queued_bytes,
                     w, float(fb.q_value), bool(rec.violated), float(rec.cost)))
        obs = next_obs
    return RunReport(scenario.name, scheme, seed, rows)


def compare(scenario, schemes: Iterable[SchemeId | str], seeds: Iterable[int],
            out_dir: str | Path | None = None) -> list[dict]:
    """Run every (scheme, seed) pair; one summary row per scheme (population std over seeds)."""
    seeds = list(seeds)
    summary = []
    for scheme in schemes:
        scheme = SchemeId(scheme)
        aggs = []
        for seed in seeds:
            report = run(scenario, scheme, seed)
            log.info("%s seed %d: %s", scheme.value, seed, report.aggregates.as_dict())
            if out_dir is not None:
                report.write_csv(Path(out_dir) / f"{scenario.name}_{scheme.value}_seed{seed}.csv")
            aggs.append(report.aggregates)
        row = {"scheme": scheme.value, "runs": len(aggs)}
        for key in ("cumulative_cost", "avg_bandwidth", "qos_success"):
            values = [getattr(a, key) for a in aggs]
            row[f"{key}_mean"] = statistics.fmean(values)
            row[f"{key}_std"] = statistics.pstdev(values)
        summary.append(row)
    if out_dir is not None:
        write_summary(summary, Path(out_dir) / f"{scenario.name}_summary.csv")
    return summary


def write_summary(summary: list[dict], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in summary:
            writer.writerow({k: _fmt(v) for k, v in row.items()})
    return path


def random_model(n: int, rng: np.random.Generator) -> np.ndarray:
    """Row-stochastic model with ``n`` MCS buckets, ``n`` queue buckets and ``n`` actions."""
    p = rng.random((n, n, n, n, n, 2))
    return p / p.sum(axis=(3, 4, 5), keepdims=True)


def bench_vi(n: int, repetitions: int = 10, seed: int = 0) -> float:
    """Mean wall time in seconds of one value-iteration solve on a random n x n x n model."""
    if n < 2:
        raise ValueError("n must be >= 2")
    rng = np.random.default_rng(seed)
    actions = ActionSet(tuple(range(10, 10 * n + 1, 10)))
    params = CostParams.for_actions(actions, qc=50.0)
    times = []
    for _ in range(repetitions):
        model = random_model(n, rng)
        start = time.perf_counter()
        value_iteration(model, actions, params)
        times.append(time.perf_counter() - start)
    return statistics.fmean(times)
