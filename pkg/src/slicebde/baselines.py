"""Comparison schemes sharing the estimator's decide/feedback interface."""

from __future__ import annotations

import enum
import math
from dataclasses import replace
from typing import Sequence

import numpy as np

from .bandit import BanditState
from .controller import BandwidthDemandEstimator, BdeConfig, PerX1Learner
from .domain import RawObservation, SlotRecord, discretize
from .planner import Policy, extract_epsilon_soft
from .sim import ConfigError, ProtocolError


class SchemeId(str, enum.Enum):
    NO_ADAPTATION = "noadapt"
    VUCB1_ONLY = "vucb1"
    MC_CONTROL = "mc"
    PROPOSED_RL = "rl"


class NoAdaptation:
    """A single v-UCB1 instance over a one-state world."""

    def __init__(self, config: BdeConfig):
        self.config = config
        self.bandit = BanditState(config.actions, config.cost.lam, config.ucb_coeff)
        self.t = 0
        self._pending = None

    def decide(self, obs: RawObservation) -> int:
        if self._pending is not None:
            raise ProtocolError("decide() called twice without feedback()")
        w = self.bandit.select()
        self._pending = (discretize(obs, self.config.buckets), obs, w)
        return w

    def feedback(self, q_value: float) -> SlotRecord:
        if self._pending is None:
            raise ProtocolError("feedback() without a pending decide()")
        state, obs, w = self._pending
        self._pending = None
        record = SlotRecord.make(self.t, state, obs, w, q_value, self.config.cost)
        self.t += 1
        self.bandit.update(w, record.violated)
        return record


class VUcb1Only(BandwidthDemandEstimator):
    """Myopic v-UCB1 that never plans (warmup that never ends).

    With ``per_state`` (the default) one bandit is kept per discretized state
    ``(x1, x2, x3)``, so the scheme can pick a different PRB count for an empty
    and a backed-up queue. ``per_state=False`` keys bandits on ``x1`` only,
    exactly like the estimator's warmup.
    """

    def __init__(self, config: BdeConfig, rng=None, per_state: bool = True):
        if not math.isinf(config.t0):
            raise ConfigError(f"the v-UCB1 scheme requires t0 = inf, got {config.t0}")
        super().__init__(config, rng)
        self.per_state = per_state
        self.bandits: dict[tuple, BanditState] = {}

    @classmethod
    def from_config(cls, config: BdeConfig, rng=None, per_state: bool = True) -> "VUcb1Only":
        return cls(replace(config, t0=math.inf), rng, per_state)

    def bandit_for(self, state) -> BanditState:
        if not self.per_state:
            return self.learner(state.x1).bandit
        key = (state.x1, state.x2, state.x3)
        if key not in self.bandits:
            cfg = self.config
            self.bandits[key] = BanditState(cfg.actions, cfg.cost.lam, cfg.ucb_coeff)
        return self.bandits[key]

    def decide(self, obs: RawObservation) -> int:
        if self._pending is not None:
            raise ProtocolError("decide() called twice without feedback()")
        state = discretize(obs, self.config.buckets)
        self.learner(state.x1).counts += 1
        w = self.bandit_for(state).select()
        self._pending = (state, obs, w)
        return w

    def feedback(self, q_value: float) -> SlotRecord:
        if self._pending is None:
            raise ProtocolError("feedback() without a pending decide()")
        state, obs, w = self._pending
        self._pending = None
        record = SlotRecord.make(self.t, state, obs, w, q_value, self.config.cost)
        self.t += 1
        self.learners[state.x1].data.append(record)
        self.bandit_for(state).update(w, record.violated)
        return record


def first_visit_returns(episode: Sequence[SlotRecord], gamma: float) -> dict[tuple[int, int, int], float]:
    """Discounted return from the first visit of each ``(x2, x3, w)`` to the end of the episode."""
    g = 0.0
    tails = []
    for rec in reversed(episode):
        g = rec.cost + gamma * g
        tails.append(g)
    tails.reverse()
    out = {}
    for rec, ret in zip(episode, tails):
        key = (rec.state.x2, rec.state.x3, rec.w)
        if key not in out:
            out[key] = ret
    return out


class MonteCarloControl(BandwidthDemandEstimator):
    """On-policy first-visit Monte Carlo control in place of model-based planning.

    Returns are truncated at episode boundaries (every ``period`` slots of a
    learner). The warmup log is cut into episodes of the same length when the
    first policy is built.
    """

    def __init__(self, config: BdeConfig, rng=None, warmup: bool = True):
        if not warmup:
            config = replace(config, t0=0)
        super().__init__(config, rng)
        _, n2, n3 = config.buckets.shape
        self._shape = (n2, n3, len(config.actions))
        self.returns_sum: dict[int, np.ndarray] = {}
        self.returns_n: dict[int, np.ndarray] = {}

    def q(self, x1: int) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            n = self.returns_n[x1]
            return np.where(n > 0, self.returns_sum[x1] / np.maximum(n, 1), 0.0)

    def update_episode(self, x1: int, episode: Sequence[SlotRecord]) -> Policy:
        if x1 not in self.returns_sum:
            self.returns_sum[x1] = np.zeros(self._shape)
            self.returns_n[x1] = np.zeros(self._shape, np.int64)
        actions = self.config.actions
        for (x2, x3, w), g in first_visit_returns(episode, self.config.cost.gamma).items():
            i = actions.index(w)
            self.returns_sum[x1][x2, x3, i] += g
            self.returns_n[x1][x2, x3, i] += 1
        return extract_epsilon_soft(self.q(x1), actions, self.config.eps)

    def _plan(self, learner: PerX1Learner) -> None:
        x1 = learner.x1
        T = self.config.period
        if learner.policy is None:
            episodes = [learner.data[i:i + T] for i in range(0, len(learner.data), T)] or [[]]
        else:
            episodes = [learner.data[-T:]]
        for ep in episodes:
            learner.policy = self.update_episode(x1, ep)
        learner.plans.append(learner.counts)


def make_scheme(scheme: SchemeId | str, config: BdeConfig, rng: np.random.Generator | None = None,
                mc_warmup: bool = True):
    scheme = SchemeId(scheme)
    if scheme is SchemeId.PROPOSED_RL:
        return BandwidthDemandEstimator(config, rng)
    if scheme is SchemeId.VUCB1_ONLY:
        return VUcb1Only.from_config(config, rng)
    if scheme is SchemeId.MC_CONTROL:
        return MonteCarloControl(config, rng, warmup=mc_warmup)
    return NoAdaptation(config)
