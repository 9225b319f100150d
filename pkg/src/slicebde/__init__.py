"""Bandwidth demand estimation for RAN slices.

A per-slice controller observes (active users, average MCS, buffer level) every
slot and picks a PRB count. It warms up with a monotone bandit, then plans by
value iteration on a transition model estimated from its own log. A seeded
uplink queueing simulator and a small experiment harness come with it.
"""

from .bandit import BanditState
from .baselines import MonteCarloControl, NoAdaptation, SchemeId, VUcb1Only, make_scheme
from .config import ScenarioConfig, builtin_scenario, load_scenario
from .controller import BandwidthDemandEstimator, BdeConfig
from .domain import (ActionSet, CostParams, DiscreteState, QosStatistic, Ranges, RawObservation, SlotRecord,
                     StateBuckets, cost, discretize, lambda_for)
from .estimator import TransitionModel, augment, build_counts, estimate, fill_and_normalize
from .harness import RunReport, bench_vi, compare, run
from .planner import Policy, QTable, extract_epsilon_soft, sample_action, value_iteration
from .sim import LinkCapacityTable, QoSFeedback, SliceSimulator, UserSpec, bsr_index

__version__ = "0.1.0"
