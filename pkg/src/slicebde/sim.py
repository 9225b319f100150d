"""Seeded uplink queueing simulator for a single RAN slice.

Each slot is simulated in 1 ms ticks. Users emit constant-bitrate packets into
per-user FIFOs; every tick the allocated PRBs are handed out one at a time in
round-robin order over users that still need service, and a PRB given to user
``u`` carries ``bits_per_prb(mcs_u)`` bits. Bits of a PRB left over when a user
empties are not reused.

The round-robin start position depends only on the tick index, never on past
allocations. With that choice per-user queues are elementwise nonincreasing in
the PRB count under common random numbers, which is what makes action
monotonicity an exact property of the simulator.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numba import njit

from .domain import BSR_MAX, MCS_MAX, PRB_MAX, ParameterError, QosStatistic, RawObservation


class ConfigError(ValueError):
    pass


class ProtocolError(RuntimeError):
    """Raised when a component is driven out of order."""


# One-PRB transport block sizes (bits per 1 ms subframe) for TBS indices 0..26
# and the uplink MCS -> TBS index mapping. Only the shape matters here: the
# table is rescaled so that the base MCS entry matches the calibrated value.
_TBS_ONE_PRB = (16, 24, 32, 40, 56, 72, 88, 104, 120, 136, 144, 176, 208, 224,
                256, 280, 328, 336, 376, 408, 440, 488, 520, 552, 584, 616, 712)
_UL_MCS_TO_ITBS = tuple(range(0, 11)) + tuple(range(10, 20)) + tuple(range(19, 27))


BSR_MAX_BYTES = 150_000


def bsr_index(queued_bytes: int) -> int:
    """Logarithmic buffer-size index in 0..63.

    0 only for an empty buffer, 1 up to 10 bytes, then 61 log-spaced steps up to
    150 000 bytes (index 62); anything larger saturates at 63.
    """
    if queued_bytes < 0:
        raise ValueError("queued_bytes must be >= 0")
    if queued_bytes == 0:
        return 0
    if queued_bytes <= 10:
        return 1
    if queued_bytes > BSR_MAX_BYTES:
        return BSR_MAX
    step = math.log(queued_bytes / 10.0) / math.log(BSR_MAX_BYTES / 10.0)
    return min(BSR_MAX - 1, 1 + math.ceil(61 * step - 1e-9))



@dataclass(frozen=True)
class LinkCapacityTable:
    bits_per_prb_per_ms: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits_per_prb_per_ms)
        object.__setattr__(self, "bits_per_prb_per_ms", bits)
        if len(bits) != MCS_MAX + 1:
            raise ConfigError(f"capacity table needs {MCS_MAX + 1} entries, got {len(bits)}")
        if any(b <= 0 for b in bits):
            raise ConfigError("capacity table entries must be positive")
        if any(b < a for a, b in zip(bits, bits[1:])):
            raise ConfigError("capacity table must be nondecreasing in MCS")

    def __getitem__(self, mcs: int) -> int:
        return self.bits_per_prb_per_ms[mcs]

    @classmethod
    def calibrated(cls, base_mcs: int = 20, bits_at_base: int = 410) -> "LinkCapacityTable":
        """Standard spectral-efficiency curve rescaled to ``bits_at_base`` at ``base_mcs``."""
        ref = _TBS_ONE_PRB[_UL_MCS_TO_ITBS[base_mcs]]
        scale = bits_at_base / ref
        bits = [max(1, round(_TBS_ONE_PRB[_UL_MCS_TO_ITBS[m]] * scale)) for m in range(MCS_MAX + 1)]
        bits[base_mcs] = bits_at_base
        return cls(tuple(bits))


def capacity_window(offered_bps: float, sustainable_prbs: int) -> tuple[float, float]:
    """Open interval of bits/PRB/ms for which ``sustainable_prbs`` carries the load and one PRB fewer does not."""
    per_ms = offered_bps / 1000.0
    return per_ms / sustainable_prbs, per_ms / (sustainable_prbs - 1)


def calibrate_bits_per_prb(offered_bps: float, sustainable_prbs: int, target: float | None = None) -> int:
    """Pick an integer bits/PRB/ms inside :func:`capacity_window`.

    ``target`` defaults to the window midpoint; it must fall strictly inside.
    """
    lo, hi = capacity_window(offered_bps, sustainable_prbs)
    value = round((lo + hi) / 2 if target is None else target)
    if not lo < value < hi:
        raise ConfigError(f"{value} bits/PRB/ms is outside the calibration window ({lo:.2f}, {hi:.2f})")
    return value


@dataclass(frozen=True)
class UserSpec:
    packet_bytes: int
    bitrate_bps: int
    intervals: tuple[tuple[int, int], ...]
    base_mcs: int = 20
    mcs_noise_std: float = 0.0
    mcs_slope: float = 0.0

    def __post_init__(self):
        intervals = tuple((int(a), int(b)) for a, b in self.intervals)
        object.__setattr__(self, "intervals", intervals)
        if self.packet_bytes <= 0 or self.bitrate_bps <= 0:
            raise ConfigError("packet_bytes and bitrate_bps must be positive")
        if not 0 <= self.base_mcs <= MCS_MAX:
            raise ConfigError(f"base_mcs must lie in [0, {MCS_MAX}]")
        if self.mcs_noise_std < 0:
            raise ConfigError("mcs_noise_std must be >= 0")
        prev_end = -1
        for start, end in intervals:
            if start < 0 or end <= start or start < prev_end:
                raise ConfigError(f"on/off intervals must be ascending and non-overlapping: {intervals}")
            prev_end = end

    def active(self, slot: int) -> bool:
        return any(a <= slot < b for a, b in self.intervals)

    @property
    def inter_arrival_s(self) -> float:
        return self.packet_bytes * 8 / self.bitrate_bps


@dataclass(frozen=True)
class QoSFeedback:
    q_value: float
    per_user: tuple[float, ...]
    delivered: int
    arrived_bits: int = 0
    delivered_bits: int = 0
    queued_bits_start: int = 0
    queued_bits_end: int = 0
    granted_prbs: int = 0
    prb_shortfall: int = 0
    idle_ticks_with_backlog: int = 0


# stats slots filled by the kernel
_ARRIVED, _DELIVERED, _GRANTED, _SHORTFALL, _IDLE = range(5)


@njit(cache=True)
def _simulate_slot(tick0, n_ticks, w, bpp, emitting, credit, rate, pkt_bits,
                   fifo, head, size, head_rem, queued, out_delay, out_n, stats):
    n_users = bpp.shape[0]
    cap = fifo.shape[1]
    need = np.zeros(n_users, np.int64)
    grant = np.zeros(n_users, np.int64)
    for k in range(n_ticks):
        now = tick0 + k
        for u in range(n_users):
            if emitting[u]:
                credit[u] += rate[u]
                threshold = pkt_bits[u] * 1000
                while credit[u] >= threshold:
                    credit[u] -= threshold
                    fifo[u, (head[u] + size[u]) % cap] = now
                    if size[u] == 0:
                        head_rem[u] = pkt_bits[u]
                    size[u] += 1
                    queued[u] += pkt_bits[u]
                    stats[0] += pkt_bits[u]

        total_need = 0
        for u in range(n_users):
            need[u] = (queued[u] + bpp[u] - 1) // bpp[u]
            grant[u] = 0
            total_need += need[u]
        if total_need <= w:
            for u in range(n_users):
                grant[u] = need[u]
            granted = total_need
        else:
            granted = 0
            start = now % n_users
            while granted < w:
                for j in range(n_users):
                    u = (start + j) % n_users
                    if grant[u] < need[u] and granted < w:
                        grant[u] += 1
                        granted += 1
        stats[2] += granted
        stats[3] += min(w, total_need) - granted

        backlog = False
        for u in range(n_users):
            budget = grant[u] * bpp[u]
            while budget > 0 and size[u] > 0:
                if head_rem[u] <= budget:
                    budget -= head_rem[u]
                    queued[u] -= head_rem[u]
                    stats[1] += head_rem[u]
                    out_delay[u, out_n[u]] = now + 1 - fifo[u, head[u]]
                    out_n[u] += 1
                    head[u] = (head[u] + 1) % cap
                    size[u] -= 1
                    head_rem[u] = pkt_bits[u] if size[u] > 0 else 0
                else:
                    head_rem[u] -= budget
                    queued[u] -= budget
                    stats[1] += budget
                    budget = 0
            if size[u] > 0:
                backlog = True
        if backlog and granted < w:
            stats[4] += 1


def _statistic(values: np.ndarray, statistic: QosStatistic, quantile: float) -> float:
    if statistic is QosStatistic.MEAN:
        return float(values.mean())
    ordered = np.sort(values)
    rank = max(1, math.ceil(quantile * len(ordered) - 1e-12))
    return float(ordered[rank - 1])


@dataclass
class SliceSimulator:
    users: Sequence[UserSpec]
    capacity: LinkCapacityTable = field(default_factory=LinkCapacityTable.calibrated)
    slot_length_s: float = 1.0
    n_slots: int = 1000
    statistic: QosStatistic = QosStatistic.MEAN
    quantile: float = 0.9

    def __post_init__(self):
        self.users = tuple(self.users)
        if self.slot_length_s <= 0:
            raise ConfigError("slot_length_s must be > 0")
        if self.n_slots < 1:
            raise ConfigError("n_slots must be >= 1")
        self.statistic = QosStatistic(self.statistic)
        self._ready = False

    @classmethod
    def from_scenario(cls, scenario) -> "SliceSimulator":
        return cls(users=scenario.users, capacity=scenario.capacity, slot_length_s=scenario.slot_length_s,
                   n_slots=scenario.slots, statistic=scenario.cost.statistic, quantile=scenario.cost.quantile)

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def slot(self) -> int:
        return self._slot

    def reset(self, seed) -> RawObservation:
        traffic_rng, self._channel_rng = (np.random.default_rng([int(seed), i]) for i in (1, 2))
        n = max(self.n_users, 1)
        self._rate = np.array([u.bitrate_bps for u in self.users], np.int64)
        self._pkt_bits = np.array([u.packet_bytes * 8 for u in self.users], np.int64)
        # random initial phase of each user's packet clock
        self._credit = np.array([traffic_rng.integers(0, b * 1000) for b in self._pkt_bits], np.int64)
        self._fifo = np.zeros((n, 64), np.int64)
        self._head = np.zeros(n, np.int64)
        self._size = np.zeros(n, np.int64)
        self._head_rem = np.zeros(n, np.int64)
        self._queued = np.zeros(n, np.int64)
        self._slot = 0
        self._tick = 0
        self._draw_channel()
        self._ready = True
        return self.observe()

    def _draw_channel(self):
        noise = self._channel_rng.standard_normal(self.n_users)
        self._mcs = np.array([
            min(MCS_MAX, max(0, int(np.rint(u.base_mcs + u.mcs_slope * self._slot + u.mcs_noise_std * z))))
            for u, z in zip(self.users, noise)
        ], np.int64)
        self._active = np.array([u.active(self._slot) for u in self.users], np.bool_)

    @property
    def mcs(self) -> np.ndarray:
        return self._mcs.copy()

    @property
    def active(self) -> np.ndarray:
        return self._active.copy()

    @property
    def queued_bits(self) -> int:
        return int(self._queued[: self.n_users].sum())

    def observe(self) -> RawObservation:
        bits = self.queued_bits
        nbytes = -(-bits // 8)
        if self.n_users == 0:
            avg = 0.0
        elif self._active.any():
            avg = float(self._mcs[self._active].mean())
        else:
            avg = float(self._mcs.mean())
        return RawObservation(int(self._active.sum()), avg, bsr_index(nbytes), nbytes)

    def _ensure_capacity(self, n_ticks: int) -> int:
        per_threshold = self._pkt_bits * 1000
        max_arrivals = (self._credit + self._rate * n_ticks) // np.maximum(per_threshold, 1) + 1
        need = int((self._size[: self.n_users] + max_arrivals).max()) if self.n_users else 1
        cap = self._fifo.shape[1]
        if need > cap:
            new_cap = max(need, 2 * cap)
            grown = np.zeros((self._fifo.shape[0], new_cap), np.int64)
            for u in range(self.n_users):
                idx = (self._head[u] + np.arange(self._size[u])) % cap
                grown[u, : self._size[u]] = self._fifo[u, idx]
            self._fifo = grown
            self._head[:] = 0
        return need

    def step(self, w: int, slot_length_s: float | None = None) -> tuple[QoSFeedback, RawObservation]:
        if not self._ready:
            raise ProtocolError("reset() must be called before step()")
        if self._slot >= self.n_slots:
            raise ProtocolError(f"scenario exhausted after {self.n_slots} slots")
        if not 1 <= w <= PRB_MAX:
            raise ParameterError(f"w must lie in [1, {PRB_MAX}], got {w}")
        length = self.slot_length_s if slot_length_s is None else slot_length_s
        n_ticks = int(round(length * 1000))
        if n_ticks < 1:
            raise ParameterError("slot must span at least one 1 ms tick")

        n = max(self.n_users, 1)
        out_len = self._ensure_capacity(n_ticks)
        out_delay = np.zeros((n, out_len), np.int64)
        out_n = np.zeros(n, np.int64)
        stats = np.zeros(5, np.int64)
        start_bits = self.queued_bits
        tick0 = self._tick
        if self.n_users:
            bpp = np.array([self.capacity[m] for m in self._mcs], np.int64)
            _simulate_slot(tick0, n_ticks, int(w), bpp, self._active, self._credit, self._rate, self._pkt_bits,
                           self._fifo, self._head, self._size, self._head_rem, self._queued, out_delay, out_n, stats)
        end_tick = tick0 + n_ticks
        self._tick = end_tick

        per_user = []
        for u in range(self.n_users):
            if not self._active[u]:
                continue
            if out_n[u] == 0:
                per_user.append(math.inf if self._size[u] > 0 else 0.0)
                continue
            cap = self._fifo.shape[1]
            idx = (self._head[u] + np.arange(self._size[u])) % cap
            # packets still queued enter with their age at slot end
            censored = end_tick - self._fifo[u, idx]
            values = np.concatenate([out_delay[u, : out_n[u]], censored]).astype(float)
            per_user.append(_statistic(values, self.statistic, self.quantile))
        q_value = max(per_user, default=0.0)

        feedback = QoSFeedback(
            q_value=q_value,
            per_user=tuple(per_user),
            delivered=int(out_n.sum()),
            arrived_bits=int(stats[_ARRIVED]),
            delivered_bits=int(stats[_DELIVERED]),
            queued_bits_start=start_bits,
            queued_bits_end=self.queued_bits,
            granted_prbs=int(stats[_GRANTED]),
            prb_shortfall=int(stats[_SHORTFALL]),
            idle_ticks_with_backlog=int(stats[_IDLE]),
        )
        self._slot += 1
        self._draw_channel()
        return feedback, self.observe()

    @property
    def exhausted(self) -> bool:
        return self._slot >= self.n_slots

    def clone(self) -> "SliceSimulator":
        return copy.deepcopy(self)
