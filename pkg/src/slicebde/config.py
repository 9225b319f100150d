"""Scenario documents.

A scenario is a JSON object with ``schema_version`` 1::

    {
      "schema_version": 1,
      "name": "scenario1",
      "slots": 500,
      "slot_length_s": 3.0,
      "seed": 0,
      "users": [{"count": 10, "packet_bytes": 200, "bitrate_bps": 1000000,
                 "intervals": [[0, 500]], "base_mcs": 20, "mcs_noise_std": 0.0}],
      "qos": {"statistic": "mean", "qc_ms": 50},
      "bde": {"actions": [24, 25, 90], "t0": 20, "period": 20, "eps": 0.01,
              "buckets": {"users": [[0, 64]], "mcs": [[0, 12], [12, 28]],
                          "queue": [[0, 20], [20, 40], [40, 61], [61, 63]]}},
      "capacity": {"base_mcs": 20, "bits_at_base": 405}
    }

Unknown keys anywhere are rejected. ``bde.lambda`` defaults to
``(Wmax - Wmin) / alpha``. ``capacity`` may instead give a full 29-entry
``table``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from .controller import BdeConfig
from .domain import ActionSet, CostParams, Ranges, StateBuckets, lambda_for
from .sim import ConfigError, LinkCapacityTable, UserSpec

SCHEMA_VERSION = 1


def _check_keys(d: dict, where: str, required: set[str], optional: set[str] = frozenset()) -> None:
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object, got {type(d).__name__}")
    missing = required - d.keys()
    if missing:
        raise ConfigError(f"{where}: missing keys {sorted(missing)}")
    unknown = d.keys() - required - optional
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")


def _users(items: list) -> tuple[UserSpec, ...]:
    users = []
    keys = {"packet_bytes", "bitrate_bps", "intervals"}
    extra = {"count", "base_mcs", "mcs_noise_std", "mcs_slope"}
    for i, item in enumerate(items):
        _check_keys(item, f"users[{i}]", keys, extra)
        spec = {k: v for k, v in item.items() if k != "count"}
        spec["intervals"] = tuple(tuple(iv) for iv in spec["intervals"])
        users.extend(UserSpec(**spec) for _ in range(int(item.get("count", 1))))
    return tuple(users)


def _t0(value) -> float:
    if value in ("inf", "infinity", None):
        return math.inf
    return float(value) if isinstance(value, float) else int(value)


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    slots: int
    slot_length_s: float
    users: tuple[UserSpec, ...]
    bde: BdeConfig
    capacity: LinkCapacityTable
    seed: int = 0
    source: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.slots < 1:
            raise ConfigError("slots must be >= 1")
        if self.slot_length_s <= 0:
            raise ConfigError("slot_length_s must be > 0")
        max_users = self.bde.buckets.users.edges[-1]
        if len(self.users) > max_users:
            raise ConfigError(f"{len(self.users)} users exceed the users buckets' upper edge {max_users}")

    @property
    def cost(self) -> CostParams:
        return self.bde.cost

    @property
    def actions(self) -> ActionSet:
        return self.bde.actions

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "ScenarioConfig":
        _check_keys(doc, "scenario", {"schema_version", "slots", "slot_length_s", "users", "qos", "bde"},
                    {"name", "seed", "capacity"})
        if doc["schema_version"] != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {doc['schema_version']!r}, expected {SCHEMA_VERSION}")

        qos = doc["qos"]
        _check_keys(qos, "qos", {"qc_ms"}, {"statistic", "quantile"})

        bde = doc["bde"]
        _check_keys(bde, "bde", {"actions", "buckets"},
                    {"t0", "period", "eps", "alpha", "lambda", "gamma", "ucb_coeff", "vi_threshold", "vi_max_iters"})
        _check_keys(bde["buckets"], "bde.buckets", {"users", "mcs", "queue"})
        try:
            actions = ActionSet(tuple(bde["actions"]))
            buckets = StateBuckets(*(Ranges.from_pairs(bde["buckets"][k]) for k in ("users", "mcs", "queue")))
            alpha = float(bde.get("alpha", 0.01))
            lam = bde.get("lambda")
            cost = CostParams(
                lam=float(lam) if lam is not None else lambda_for(actions.wmax, actions.wmin, alpha),
                qc=float(qos["qc_ms"]),
                gamma=float(bde.get("gamma", 0.99)),
                alpha=alpha,
                statistic=qos.get("statistic", "mean"),
                quantile=float(qos.get("quantile", 0.9)),
            )
            config = BdeConfig(
                buckets=buckets,
                actions=actions,
                cost=cost,
                t0=_t0(bde.get("t0", 100)),
                period=int(bde.get("period", 20)),
                eps=float(bde.get("eps", 0.01)),
                ucb_coeff=float(bde.get("ucb_coeff", 1.0)),
                vi_threshold=float(bde.get("vi_threshold", 1e-6)),
                vi_max_iters=int(bde.get("vi_max_iters", 10_000)),
            )
        except ValueError as exc:
            raise ConfigError(f"bde: {exc}") from None

        cap = doc.get("capacity", {})
        _check_keys(cap, "capacity", set(), {"base_mcs", "bits_at_base", "table"})
        if "table" in cap:
            if cap.keys() - {"table"}:
                raise ConfigError("capacity: give either 'table' or base_mcs/bits_at_base, not both")
            capacity = LinkCapacityTable(tuple(cap["table"]))
        else:
            capacity = LinkCapacityTable.calibrated(int(cap.get("base_mcs", 20)), int(cap.get("bits_at_base", 410)))

        return cls(
            name=str(doc.get("name", "scenario")),
            slots=int(doc["slots"]),
            slot_length_s=float(doc["slot_length_s"]),
            users=_users(doc["users"]),
            bde=config,
            capacity=capacity,
            seed=int(doc.get("seed", 0)),
            source=doc,
        )


def load_scenario(path: str | Path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return ScenarioConfig.from_dict(doc)


def builtin_scenario(name: str) -> ScenarioConfig:
    """Load one of the packaged scenarios (``scenario1``, ``scenario2``, ``scenario3``)."""
    ref = resources.files("slicebde.scenarios").joinpath(f"{name}.json")
    if not ref.is_file():
        raise ConfigError(f"no packaged scenario named {name!r}")
    return ScenarioConfig.from_dict(json.loads(ref.read_text(encoding="utf-8")))
