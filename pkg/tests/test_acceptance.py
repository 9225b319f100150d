"""Acceptance criteria 1-10, one test each.

Every test records a PASS/FAIL line in ``RESULTS``; the lines are printed as they
happen and again in the terminal summary (see conftest.py).
"""

import itertools
import time

import numpy as np
import pytest

from slicebde.bandit import BanditState
from slicebde.config import builtin_scenario
from slicebde.domain import ActionSet, CostParams, lambda_for
from slicebde.estimator import SUCCESS, VIOLATION, augment, build_counts, fill
from slicebde.harness import bench_vi, run
from slicebde.planner import expected_cost, extract_epsilon_soft, sample_action, value_iteration
from slicebde.sim import LinkCapacityTable, SliceSimulator, UserSpec

from test_estimator import AUG_HAND, HAND_LOG, P_HAND, W as HAND_W, dense, fill_hand

RESULTS = []


def record(n, ok, detail):
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def scenario1_reports():
    sc = builtin_scenario("scenario1")
    start = time.perf_counter()
    reports = {s: run(sc, s) for s in ("rl", "vucb1", "noadapt", "mc")}
    return reports, time.perf_counter() - start


# 1 -----------------------------------------------------------------------

def solve_by_enumeration(probs, actions, params):
    n2, n3, nw = probs.shape[:3]
    n = n2 * n3
    c = expected_cost(probs, actions, params.lam).reshape(n, nw)
    T = probs.sum(axis=-1).reshape(n, nw, n)
    best = None
    for pol in itertools.product(range(nw), repeat=n):
        rows = np.arange(n)
        j = np.linalg.solve(np.eye(n) - params.gamma * T[rows, pol], c[rows, pol])
        best = j if best is None else np.minimum(best, j)
    return best.reshape(n2, n3)


def test_c1_vi_matches_policy_enumeration():
    rng = np.random.default_rng(2024)
    actions = ActionSet((10, 30))
    params = CostParams.for_actions(actions, qc=50.0)
    probs = rng.random((3, 1, 2, 3, 1, 2))
    probs /= probs.sum(axis=(3, 4, 5), keepdims=True)
    start = time.perf_counter()
    qt = value_iteration(probs, actions, params)
    elapsed = time.perf_counter() - start
    err = float(np.max(np.abs(qt.j - solve_by_enumeration(probs, actions, params))))
    record(1, err <= 1e-4 and elapsed < 1.0, f"VI vs enumeration max error {err:.2e} (<= 1e-4), {elapsed:.3f}s (< 1s)")


# 2 -----------------------------------------------------------------------

def test_c2_scenario1(scenario1_reports):
    reports, elapsed = scenario1_reports
    rl_tail = reports["rl"].window(100)
    vucb1_bw = reports["vucb1"].aggregates.avg_bandwidth
    costs = {s: r.aggregates.cumulative_cost for s, r in reports.items()}
    others = min(v for s, v in costs.items() if s != "rl")
    checks = {
        "a": 24.5 <= rl_tail.avg_bandwidth <= 28,
        "b": vucb1_bw >= 50,
        "c": rl_tail.qos_success >= 0.95,
        "d": costs["rl"] < others,
    }
    detail = (f"(a) rl final-100 bw {rl_tail.avg_bandwidth:.2f} in [24.5, 28]; (b) vucb1 bw {vucb1_bw:.2f} >= 50; "
              f"(c) rl final-100 QoS {rl_tail.qos_success:.3f} >= 0.95; (d) costs "
              + ", ".join(f"{s} {v:.0f}" for s, v in costs.items())
              + f" with rl least; {elapsed:.1f}s (< 120s)")
    record(2, all(checks.values()) and elapsed < 120, detail)


# 3 -----------------------------------------------------------------------

def test_c3_scenario2():
    sc = builtin_scenario("scenario2")
    start = time.perf_counter()
    aggs = {s: run(sc, s).aggregates for s in ("rl", "vucb1", "noadapt")}
    elapsed = time.perf_counter() - start
    rl, vu, na = aggs["rl"], aggs["vucb1"], aggs["noadapt"]
    reduction = 1 - rl.avg_bandwidth / na.avg_bandwidth
    ok = (rl.cumulative_cost < na.cumulative_cost and rl.cumulative_cost < vu.cumulative_cost
          and reduction >= 0.20 and elapsed < 300)
    record(3, ok, f"cost rl {rl.cumulative_cost:.0f} < noadapt {na.cumulative_cost:.0f} and vucb1 "
                  f"{vu.cumulative_cost:.0f}; bw rl {rl.avg_bandwidth:.2f} vs noadapt {na.avg_bandwidth:.2f} "
                  f"({reduction:.1%} reduction, >= 20%); {elapsed:.1f}s (< 300s)")


# 4 -----------------------------------------------------------------------

def test_c4_algorithm2_hand_log():
    P = build_counts(HAND_LOG, HAND_W, 2, 4)
    Pa = augment(P)
    Pf = fill(P, Pa)
    ok = (np.array_equal(P, dense(P_HAND)) and np.array_equal(Pa, dense({**P_HAND, **AUG_HAND}))
          and np.array_equal(Pf, fill_hand()))
    record(4, ok, f"P, P', P'' equal the hand counts exactly (totals {P.sum()}, {Pa.sum()}, {Pf.sum()})")


# 5 -----------------------------------------------------------------------

def test_c5_lambda_preference():
    rng = np.random.default_rng(5)
    alpha, gamma = 0.01, 0.99
    n_next, checked, counterexamples = 6, 0, 0
    while checked < 2000:
        values = np.sort(rng.choice(np.arange(1, 101), size=rng.integers(2, 6), replace=False))
        actions = ActionSet(tuple(int(v) for v in values))
        params = CostParams(lam=lambda_for(actions.wmax, actions.wmin, alpha), qc=50.0, gamma=gamma)
        i, k = sorted(rng.choice(len(actions), size=2, replace=False))
        pv = rng.random()
        pv_hi = rng.uniform(0, pv - alpha) if pv >= alpha else None
        if pv_hi is None:
            continue
        # cost-to-go nondecreasing in the queue index; the larger action shifts next-state mass downwards
        j = np.sort(rng.random(n_next) * rng.uniform(1, 1e5))
        nxt = rng.dirichlet(np.ones(n_next))
        cut = rng.integers(0, n_next)
        nxt_hi = nxt.copy()
        nxt_hi[:cut + 1] = 0
        nxt_hi[0] = nxt[:cut + 1].sum()
        probs = np.zeros((1, 1, len(actions), 1, n_next, 2))
        probs[0, 0, i, 0, :, VIOLATION] = pv * nxt
        probs[0, 0, i, 0, :, SUCCESS] = (1 - pv) * nxt
        probs[0, 0, k, 0, :, VIOLATION] = pv_hi * nxt_hi
        probs[0, 0, k, 0, :, SUCCESS] = (1 - pv_hi) * nxt_hi
        # Q(x, w) = w + lambda p_v(x, w) + gamma sum p(x'|x, w) J(x')
        q = expected_cost(probs, actions, params.lam) + gamma * np.einsum("abwxy,xy->abw", probs.sum(-1), j[None, :])
        checked += 1
        counterexamples += int(q[0, 0, k] > q[0, 0, i] + 1e-9)
    record(5, counterexamples == 0, f"{checked} monotone instances, {counterexamples} counterexamples")


# 6 -----------------------------------------------------------------------

def regret(actions, lam, p_violation, uniforms, propagate):
    bandit = BanditState(actions, lam, propagate=propagate)
    means = np.array(actions.prb_values) + lam * np.asarray(p_violation)
    best = means.min()
    total = 0.0
    for u in uniforms:
        w = bandit.select()
        i = actions.index(w)
        bandit.update(w, bool(u < p_violation[i]))
        total += means[i] - best
    return total


def test_c6_vucb1_beats_ucb1():
    actions = ActionSet((20, 40, 60, 90))
    lam = lambda_for(actions.wmax, actions.wmin, 0.01)
    p = (1.0, 0.6, 0.1, 0.0)
    v, s = [], []
    for seed in range(30):
        uniforms = np.random.default_rng(seed).random(2000)
        v.append(regret(actions, lam, p, uniforms, True))
        s.append(regret(actions, lam, p, uniforms, False))
    mv, ms = float(np.mean(v)), float(np.mean(s))
    record(6, mv < ms, f"mean regret over 30 seeds x 2000 rounds: v-UCB1 {mv:.0f} < UCB1 {ms:.0f}")


# 7 -----------------------------------------------------------------------

def random_simulator(rng):
    n = int(rng.integers(1, 7))
    users = []
    for _ in range(n):
        start = int(rng.integers(0, 50))
        users.append(UserSpec(int(rng.integers(40, 1500)), int(rng.integers(50_000, 3_000_000)),
                              ((start, start + int(rng.integers(20, 400))),),
                              base_mcs=int(rng.integers(0, 29)), mcs_noise_std=float(rng.uniform(0, 3))))
    sim = SliceSimulator(users, LinkCapacityTable.calibrated(20, int(rng.integers(100, 800))),
                         slot_length_s=float(rng.choice([0.005, 0.02, 0.05, 0.1])), n_slots=10**6)
    sim.reset(int(rng.integers(0, 2**31)))
    return sim


def conserved(fb):
    return (fb.queued_bits_start + fb.arrived_bits - fb.delivered_bits == fb.queued_bits_end
            and fb.idle_ticks_with_backlog == 0 and fb.prb_shortfall == 0)


def test_c7_environment_invariants():
    rng = np.random.default_rng(7)
    slots = pairs = bad_conservation = bad_monotone = 0
    while slots < 10_000:
        sim = random_simulator(rng)
        for _ in range(200):
            w = int(rng.integers(1, 100))
            twin = sim.clone()
            fb, _ = sim.step(w)
            fb_hi, _ = twin.step(int(rng.integers(w + 1, 101)))
            slots += 1
            pairs += 1
            bad_conservation += (not conserved(fb)) + (not conserved(fb_hi))
            bad_monotone += not (fb_hi.q_value <= fb.q_value and fb_hi.queued_bits_end <= fb.queued_bits_end)
    record(7, bad_conservation == 0 and bad_monotone == 0,
           f"{slots} slots: {bad_conservation} conservation failures, "
           f"{bad_monotone}/{pairs} CRN pairs with higher w and larger Q or queue")


# 8 -----------------------------------------------------------------------

def test_c8_vi_timing():
    mean = bench_vi(5, 10)
    record(8, mean < 0.5, f"bench_vi(n=5, 10 reps) mean {mean:.4f}s (< 0.5s)")


# 9 -----------------------------------------------------------------------

def test_c9_epsilon_soft_sampling():
    actions = ActionSet((10, 20, 30))
    policy = extract_epsilon_soft(np.array([[[1.0, 2.0, 3.0]]]), actions, 0.1)
    rng = np.random.default_rng(9)
    n = 100_000
    draws = np.array([sample_action(policy, 0, 0, rng) for _ in range(n)])
    counts = np.array([(draws == w).sum() for w in actions])
    expected = np.array([0.9 + 0.1 / 3, 0.1 / 3, 0.1 / 3])
    sigma = np.sqrt(n * expected * (1 - expected))
    z = np.abs(counts - n * expected) / sigma
    record(9, bool((z <= 3).all()), f"frequencies {np.round(counts / n, 4).tolist()}, max |z| {z.max():.2f} (<= 3)")


# 10 ----------------------------------------------------------------------

def test_c10_determinism(scenario1_reports):
    reports, _ = scenario1_reports
    sc = builtin_scenario("scenario1")
    same = {s: run(sc, s).to_csv() == r.to_csv() for s, r in reports.items()}
    record(10, all(same.values()), "rerun CSV byte-identical for " + ", ".join(f"{s}={v}" for s, v in same.items()))
