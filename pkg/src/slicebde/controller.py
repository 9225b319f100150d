"""The bandwidth demand estimator slot loop.

One learner per users bucket ``x1``. Each learner runs v-UCB1 for its first
``t0`` slots, then follows an epsilon-soft policy planned by value iteration on
the model estimated from its own log, re-planning every ``period`` slots.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bandit import BanditState
from .domain import ActionSet, CostParams, RawObservation, SlotRecord, StateBuckets, discretize
from .estimator import TransitionModel, estimate
from .planner import Policy, QTable, extract_epsilon_soft, value_iteration
from .sim import ProtocolError


@dataclass(frozen=True)
class BdeConfig:
    buckets: StateBuckets
    actions: ActionSet
    cost: CostParams
    t0: float = 100
    period: int = 20
    eps: float = 0.01
    ucb_coeff: float = 1.0
    vi_threshold: float = 1e-6
    vi_max_iters: int = 10_000

    def __post_init__(self):
        if self.t0 < 0:
            raise ValueError("t0 must be >= 0")
        if self.period < 1:
            raise ValueError("period must be >= 1")
        if not 0.0 <= self.eps <= 1.0:
            raise ValueError("eps must lie in [0, 1]")


@dataclass
class PerX1Learner:
    x1: int
    bandit: BanditState
    counts: int = 0
    data: list = field(default_factory=list)
    policy: Policy | None = None
    model: TransitionModel | None = None
    qtable: QTable | None = None
    plans: list = field(default_factory=list)  # counts value at each (re)plan


class BandwidthDemandEstimator:
    """Decide/feedback loop; the two calls must alternate."""

    def __init__(self, config: BdeConfig, rng: np.random.Generator | None = None):
        self.config = config
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.learners: dict[int, PerX1Learner] = {}
        self.t = 0
        self._pending = None

    def learner(self, x1: int) -> PerX1Learner:
        if x1 not in self.learners:
            cfg = self.config
            self.learners[x1] = PerX1Learner(x1, BanditState(cfg.actions, cfg.cost.lam, cfg.ucb_coeff))
        return self.learners[x1]

    def in_warmup(self, learner: PerX1Learner) -> bool:
        return learner.counts <= self.config.t0

    def decide(self, obs: RawObservation) -> int:
        if self._pending is not None:
            raise ProtocolError("decide() called twice without feedback()")
        state = discretize(obs, self.config.buckets)
        learner = self.learner(state.x1)
        learner.counts += 1
        if self.in_warmup(learner):
            w = learner.bandit.select()
        else:
            if learner.policy is None:
                self._plan(learner)
            w = learner.policy.sample(state.x2, state.x3, self.rng)
        self._pending = (state, obs, w)
        return w

    def feedback(self, q_value: float) -> SlotRecord:
        if self._pending is None:
            raise ProtocolError("feedback() without a pending decide()")
        state, obs, w = self._pending
        self._pending = None
        record = SlotRecord.make(self.t, state, obs, w, q_value, self.config.cost)
        self.t += 1
        learner = self.learners[state.x1]
        learner.data.append(record)
        if self.in_warmup(learner):
            learner.bandit.update(w, record.violated)
        elif (learner.counts - self.config.t0) % self.config.period == 0:
            self._plan(learner)
        return record

    def _plan(self, learner: PerX1Learner) -> None:
        cfg = self.config
        _, n2, n3 = cfg.buckets.shape
        learner.model = estimate(learner.data, cfg.actions, n2, n3)
        learner.qtable = value_iteration(learner.model, cfg.actions, cfg.cost, cfg.vi_threshold, cfg.vi_max_iters)
        learner.policy = extract_epsilon_soft(learner.qtable, cfg.actions, cfg.eps)
        learner.plans.append(learner.counts)

