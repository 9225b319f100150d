"""UCB1 over PRB arms, with optional monotone feedback propagation (v-UCB1).

Arms are scored by a lower confidence bound on their normalised cost. With
``propagate=True`` one slot's binary QoS outcome is credited to every arm it
implies something about: a violation at ``w`` means every ``w' <= w`` would have
violated too, a success means every ``w' >= w`` would have succeeded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .domain import ActionSet


@dataclass
class BanditState:
    actions: ActionSet
    lam: float
    coeff: float = 1.0
    propagate: bool = True
    counts: np.ndarray = field(init=False)
    sums: np.ndarray = field(init=False)
    rounds: int = field(init=False, default=0)

    def __post_init__(self):
        self.counts = np.zeros(len(self.actions), np.int64)
        self.sums = np.zeros(len(self.actions))

    @property
    def means(self) -> np.ndarray:
        """Empirical mean cost per arm (nan for arms without samples)."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.counts > 0, self.sums / np.maximum(self.counts, 1), np.nan)

    @property
    def scale(self) -> float:
        return self.actions.wmax + self.lam

    def scores(self) -> np.ndarray:
        mu = self.sums / np.maximum(self.counts, 1) / self.scale
        radius = self.coeff * np.sqrt(2.0 * math.log(max(self.rounds, 1)) / np.maximum(self.counts, 1))
        return mu - radius

    def select(self) -> int:
        unpulled = np.flatnonzero(self.counts == 0)
        if unpulled.size:
            # explore from the top: large arms first
            return self.actions[int(unpulled[-1])]
        # argmin returns the first minimum, i.e. the smallest w on ties
        return self.actions[int(np.argmin(self.scores()))]

    def update(self, w: int, violated: bool) -> None:
        i = self.actions.index(w)
        values = np.asarray(self.actions.prb_values, float)
        if not self.propagate:
            arms = np.array([i])
        elif violated:
            arms = np.arange(i + 1)
        else:
            arms = np.arange(i, len(self.actions))
        self.counts[arms] += 1
        self.sums[arms] += values[arms] + (self.lam if violated else 0.0)
        self.rounds += 1

