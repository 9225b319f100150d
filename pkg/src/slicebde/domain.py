"""Core slice types: observations, state buckets, actions and the slot cost."""

from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

MCS_MAX = 28
BSR_MAX = 63
PRB_MAX = 100


class DomainError(ValueError):
    """An observation or parameter lies outside its declared domain."""


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class RawObservation:
    active_users: int
    avg_mcs: float
    queue_level: int
    queued_bytes: int = 0

    def __post_init__(self):
        if self.active_users < 0:
            raise DomainError(f"active_users must be >= 0, got {self.active_users}")
        if not 0.0 <= self.avg_mcs <= MCS_MAX:
            raise DomainError(f"avg_mcs must lie in [0, {MCS_MAX}], got {self.avg_mcs}")
        if not 0 <= self.queue_level <= BSR_MAX:
            raise DomainError(f"queue_level must lie in [0, {BSR_MAX}], got {self.queue_level}")
        if self.queued_bytes < 0:
            raise DomainError(f"queued_bytes must be >= 0, got {self.queued_bytes}")
        if (self.queued_bytes == 0) != (self.queue_level == 0):
            raise DomainError("queue_level must be 0 exactly when queued_bytes is 0")


@dataclass(frozen=True)
class Ranges:
    """Ascending ranges given by their edges.

    ``edges = (e0, e1, ..., en)`` describes ``[e0, e1), [e1, e2), ..., [e(n-1), en]``:
    every range is half-open except the last, which is closed.
    """

    edges: tuple[float, ...]

    def __post_init__(self):
        edges = tuple(self.edges)
        object.__setattr__(self, "edges", edges)
        if len(edges) < 2:
            raise ParameterError("need at least one range (two edges)")
        if any(b <= a for a, b in zip(edges, edges[1:])):
            raise ParameterError(f"range edges must be strictly ascending: {edges}")

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[float]]) -> "Ranges":
        """Build from ``[[lo, hi], ...]`` as written in scenario tables."""
        if not pairs:
            raise ParameterError("empty range list")
        for (_, hi), (lo, _) in zip(pairs, pairs[1:]):
            if hi != lo:
                raise ParameterError(f"ranges leave a gap or overlap: {pairs}")
        return cls(tuple(p[0] for p in pairs) + (pairs[-1][1],))

    def pairs(self) -> list[list[float]]:
        return [[a, b] for a, b in zip(self.edges, self.edges[1:])]

    def __len__(self):
        return len(self.edges) - 1

    def index(self, value: float) -> int:
        lo, hi = self.edges[0], self.edges[-1]
        if not lo <= value <= hi:
            raise DomainError(f"value {value} outside [{lo}, {hi}]")
        if value == hi:
            return len(self) - 1
        return bisect.bisect_right(self.edges, value) - 1

    def representative(self, i: int) -> float:
        return self.edges[i]


@dataclass(frozen=True)
class StateBuckets:
    users: Ranges
    mcs: Ranges
    queue: Ranges

    @property
    def shape(self) -> tuple[int, int, int]:
        return len(self.users), len(self.mcs), len(self.queue)


@dataclass(frozen=True)
class DiscreteState:
    x1: int
    x2: int
    x3: int


def discretize(obs: RawObservation, buckets: StateBuckets) -> DiscreteState:
    indices = []
    for name, value, ranges in (
        ("active_users", obs.active_users, buckets.users),
        ("avg_mcs", obs.avg_mcs, buckets.mcs),
        ("queue_level", obs.queue_level, buckets.queue),
    ):
        try:
            indices.append(ranges.index(value))
        except DomainError as exc:
            raise DomainError(f"{name}: {exc}") from None
    return DiscreteState(*indices)


@dataclass(frozen=True)
class ActionSet:
    prb_values: tuple[int, ...]

    def __post_init__(self):
        values = tuple(int(v) for v in self.prb_values)
        object.__setattr__(self, "prb_values", values)
        if not values:
            raise ParameterError("action set is empty")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ParameterError(f"actions must be strictly ascending: {values}")
        if values[0] < 1 or values[-1] > PRB_MAX:
            raise ParameterError(f"actions must lie in [1, {PRB_MAX}]: {values}")

    def __len__(self):
        return len(self.prb_values)

    def __iter__(self):
        return iter(self.prb_values)

    def __getitem__(self, i):
        return self.prb_values[i]

    @property
    def wmin(self) -> int:
        return self.prb_values[0]

    @property
    def wmax(self) -> int:
        return self.prb_values[-1]

    def index(self, w: int) -> int:
        try:
            return self.prb_values.index(w)
        except ValueError:
            raise ParameterError(f"{w} PRBs is not in the action set {self.prb_values}") from None


class QosStatistic(str, enum.Enum):
    MEAN = "mean"
    QUANTILE = "quantile"


def lambda_for(wmax: float, wmin: float, alpha: float) -> float:
    """Violation penalty making a QoS gain of ``alpha`` worth the full bandwidth range."""
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    if wmax < wmin:
        raise ParameterError(f"wmax ({wmax}) < wmin ({wmin})")
    return (wmax - wmin) / alpha


@dataclass(frozen=True)
class CostParams:
    lam: float
    qc: float
    gamma: float = 0.99
    alpha: float = 0.01
    statistic: QosStatistic = QosStatistic.MEAN
    quantile: float = 0.9

    def __post_init__(self):
        if not self.lam > 0:
            raise ParameterError(f"lambda must be > 0, got {self.lam}")
        if not self.qc > 0:
            raise ParameterError(f"qc must be > 0, got {self.qc}")
        if not 0.0 < self.gamma < 1.0:
            raise ParameterError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not 0.0 < self.alpha < 1.0:
            raise ParameterError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0.0 < self.quantile <= 1.0:
            raise ParameterError(f"quantile must lie in (0, 1], got {self.quantile}")
        object.__setattr__(self, "statistic", QosStatistic(self.statistic))

    @classmethod
    def for_actions(cls, actions: ActionSet, qc: float, alpha: float = 0.01, **kw) -> "CostParams":
        return cls(lam=lambda_for(actions.wmax, actions.wmin, alpha), qc=qc, alpha=alpha, **kw)


def is_violation(qos_value: float, params: CostParams) -> bool:
    # strict inequality; inf compares greater than any bound
    return qos_value > params.qc


def cost(w: int, qos_value: float, params: CostParams) -> float:
    if qos_value < 0 or math.isnan(qos_value):
        raise DomainError(f"qos value must be >= 0 or +inf, got {qos_value}")
    return w + params.lam * is_violation(qos_value, params)


@dataclass(frozen=True)
class SlotRecord:
    t: int
    state: DiscreteState
    obs: RawObservation
    w: int
    qos_value: float
    violated: bool
    cost: float = field(compare=False)

    @classmethod
    def make(cls, t, state, obs, w, qos_value, params: CostParams) -> "SlotRecord":
        return cls(t, state, obs, w, qos_value, is_violation(qos_value, params), cost(w, qos_value, params))
