"""Empirical transition model of the (MCS, queue) state under each PRB action.

Counts live in a dense tensor indexed ``[x2, x3, w, x2', x3', v]`` where ``v`` is
1 when the slot violated its QoS bound (cost ``w + lambda``) and 0 otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .domain import ActionSet, SlotRecord

SUCCESS, VIOLATION = 0, 1


def empty_counts(n2: int, n3: int, n_actions: int) -> np.ndarray:
    return np.zeros((n2, n3, n_actions, n2, n3, 2), np.int64)


def build_counts(log: Sequence[SlotRecord], actions: ActionSet, n2: int, n3: int) -> np.ndarray:
    """Count observed transitions between consecutive records of one stream."""
    P = empty_counts(n2, n3, len(actions))
    for rec, nxt in zip(log, log[1:]):
        s, s2 = rec.state, nxt.state
        P[s.x2, s.x3, actions.index(rec.w), s2.x2, s2.x3, int(rec.violated)] += 1
    return P


def augment(P: np.ndarray) -> np.ndarray:
    """Credit each observed outcome to the actions it implies something about.

    A violation at ``w`` is also counted for every smaller action with the next
    queue bucket one higher; a success at ``w`` is counted for every larger
    action with the next queue bucket one lower. Shifts clamp at the extremes.
    """
    Pa = P.copy()
    n3 = P.shape[1]
    n_actions = P.shape[2]
    for x2, x3, w, y2, y3, v in zip(*np.nonzero(P)):
        c = P[x2, x3, w, y2, y3, v]
        if v == VIOLATION:
            Pa[x2, x3, :w, y2, min(y3 + 1, n3 - 1), VIOLATION] += c
        else:
            Pa[x2, x3, w + 1:n_actions, y2, max(y3 - 1, 0), SUCCESS] += c
    return Pa


def fill(P: np.ndarray, Pa: np.ndarray) -> np.ndarray:
    """Observed rows from ``P``, unobserved rows from ``Pa``, optimism for the rest.

    A state never observed under any action (in either tensor) gets one
    optimistic count: the smallest action succeeds and empties the queue.
    Rows still empty after that get the same optimistic outcome for their own
    action.
    """
    n2, n3 = P.shape[:2]
    out = P.copy()
    seen = P.sum(axis=(3, 4, 5)) > 0
    out[~seen] = Pa[~seen]
    for x2 in range(n2):
        for x3 in range(n3):
            if not P[x2, x3].any() and not Pa[x2, x3].any():
                out[x2, x3, 0, x2, 0, SUCCESS] = 1
    empty = out.sum(axis=(3, 4, 5)) == 0
    for x2, x3, w in zip(*np.nonzero(empty)):
        out[x2, x3, w, x2, 0, SUCCESS] = 1
    return out


@dataclass(frozen=True)
class TransitionModel:
    """Row-normalised ``p(x2', x3', v | x2, x3, w)`` together with the count tensors it came from."""

    probs: np.ndarray
    counts: np.ndarray
    augmented: np.ndarray
    filled: np.ndarray

    @property
    def shape(self) -> tuple[int, int, int]:
        n2, n3, nw = self.probs.shape[:3]
        return n2, n3, nw

    def violation_prob(self) -> np.ndarray:
        return self.probs[..., VIOLATION].sum(axis=(3, 4))


def fill_and_normalize(P: np.ndarray, Pa: np.ndarray) -> TransitionModel:
    filled = fill(P, Pa)
    totals = filled.sum(axis=(3, 4, 5), keepdims=True)
    return TransitionModel(filled / totals, P, Pa, filled)


def estimate(log: Sequence[SlotRecord], actions: ActionSet, n2: int, n3: int) -> TransitionModel:
    P = build_counts(log, actions, n2, n3)
    return fill_and_normalize(P, augment(P))
