"""Value iteration over the estimated model and epsilon-soft policy extraction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import ActionSet, CostParams
from .estimator import VIOLATION, TransitionModel


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class QTable:
    q: np.ndarray  # [x2, x3, w]
    j: np.ndarray  # [x2, x3]
    converged: bool
    iterations: int

    def greedy(self) -> np.ndarray:
        # argmin picks the first minimum: ties go to the smaller action
        return np.argmin(self.q, axis=-1)


def expected_cost(probs: np.ndarray, actions: ActionSet, lam: float) -> np.ndarray:
    """``w + lam * p_violation(x, w)`` for every state-action pair."""
    p_v = probs[..., VIOLATION].sum(axis=(3, 4))
    return np.asarray(actions.prb_values, float) + lam * p_v


def value_iteration(model: TransitionModel | np.ndarray, actions: ActionSet, params: CostParams,
                    stop_threshold: float = 1e-6, max_iters: int = 10_000) -> QTable:
    """Minimise discounted cost on the estimated model, starting from ``J = 0``.

    Stops once the max-norm change of ``J`` between sweeps drops to
    ``stop_threshold``; otherwise returns after ``max_iters`` with
    ``converged=False``.
    """
    probs = model.probs if isinstance(model, TransitionModel) else np.asarray(model, float)
    n2, n3, nw = probs.shape[:3]
    if probs.shape != (n2, n3, nw, n2, n3, 2) or nw != len(actions):
        raise ModelError(f"model shape {probs.shape} does not match {len(actions)} actions")
    if (probs < 0).any() or not np.allclose(probs.sum(axis=(3, 4, 5)), 1.0, atol=1e-9):
        raise ModelError("transition model rows must be nonnegative and sum to 1")

    n_states = n2 * n3
    c = expected_cost(probs, actions, params.lam).reshape(n_states, nw)
    T = probs.sum(axis=-1).reshape(n_states, nw, n_states)
    j = np.zeros(n_states)
    converged = False
    it = 0
    while it < max_iters:
        it += 1
        q = c + params.gamma * (T @ j)
        j_new = q.min(axis=1)
        delta = np.max(np.abs(j_new - j))
        j = j_new
        if delta <= stop_threshold:
            converged = True
            break
    return QTable(q.reshape(n2, n3, nw), j.reshape(n2, n3), converged, it)


@dataclass(frozen=True)
class Policy:
    probs: np.ndarray  # [x2, x3, w]
    actions: ActionSet

    def distribution(self, x2: int, x3: int) -> np.ndarray:
        return self.probs[x2, x3]

    def sample(self, x2: int, x3: int, rng: np.random.Generator) -> int:
        return sample_action(self, x2, x3, rng)


def extract_epsilon_soft(q: QTable | np.ndarray, actions: ActionSet, eps: float) -> Policy:
    qv = q.q if isinstance(q, QTable) else np.asarray(q)
    if not np.isfinite(qv).all():
        raise ModelError("Q factors must be finite")
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps must lie in [0, 1], got {eps}")
    n = qv.shape[-1]
    probs = np.full(qv.shape, eps / n)
    best = np.argmin(qv, axis=-1)
    np.put_along_axis(probs, best[..., None], 1.0 - eps + eps / n, axis=-1)
    return Policy(probs, actions)


def sample_action(policy: Policy, x2: int, x3: int, rng: np.random.Generator) -> int:
    p = policy.probs[x2, x3]
    # inverse-CDF draw, one uniform per call
    i = int(np.searchsorted(np.cumsum(p), rng.random() * p.sum(), side="right"))
    return policy.actions[min(i, len(p) - 1)]
