"""Synthetic task sets (UUniFast-discard over automotive periods) and the
built-in camera/LiDAR/IMU case study."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .model import (Chain, ChainMode, ModelError, PriorityPolicy, TaskKind, TaskSet, TaskSpec,
                    assign_priorities, ms)

# automotive shares; renormalised over whatever subset is configured
AUTOMOTIVE_WEIGHTS = {1: 0.03, 2: 0.02, 5: 0.02, 10: 0.25, 20: 0.25, 50: 0.03, 100: 0.20,
                  200: 0.01, 1000: 0.04}


@dataclass(frozen=True)
class GenParams:
    utilization: float = 0.6
    tasks: tuple[int, int] = (10, 200)
    chains: tuple[int, int] = (5, 60)
    chain_length: tuple[int, int] = (2, 15)
    periods: dict = field(default_factory=lambda: dict(AUTOMOTIVE_WEIGHTS))
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.utilization <= 1:
            raise ModelError("utilization must lie in (0, 1]")
        for name in ("tasks", "chains", "chain_length"):
            lo, hi = getattr(self, name)
            if lo > hi or lo < 1:
                raise ModelError(f"empty {name} range ({lo}, {hi})")
        if not self.periods or any(w < 0 for w in self.periods.values()):
            raise ModelError("period weights must be non-negative and non-empty")
        if sum(self.periods.values()) <= 0:
            raise ModelError("period weights sum to zero")

    def period_table(self) -> tuple[np.ndarray, np.ndarray]:
        keys = sorted(self.periods)
        w = np.array([self.periods[k] for k in keys], float)
        return np.array(keys, object), w / w.sum()

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def _rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def uunifast_discard(n: int, U: float, seed=None) -> list[float]:
    if n < 1 or not 0 < U <= 1:
        raise ModelError("need n >= 1 and 0 < U <= 1")
    rng = _rng(seed)
    if n == 1:
        return [U]
    while True:
        out = []
        rest = U
        for i in range(1, n):
            nxt = rest * rng.random() ** (1.0 / (n - i))
            out.append(rest - nxt)
            rest = nxt
        out.append(rest)
        if max(out) < 1 and min(out) > 0:
            return out


def _fit_wcets(utils, periods, U) -> list[int] | None:
    """Integer-ns wcets with U - 1e-6 <= sum C/T <= U; None if a task rounds to 0."""
    target = Fraction(repr(float(U)))
    wcets = [int(Fraction(repr(float(u))) * p) for u, p in zip(utils, periods)]
    if min(wcets) <= 0:
        return None
    rest = target - sum(Fraction(c, p) for c, p in zip(wcets, periods))
    # top up, shortest period first, without pushing any task to C > T
    for i in sorted(range(len(periods)), key=lambda i: periods[i]):
        if rest <= 0:
            break
        add = min(int(rest * periods[i]), periods[i] - wcets[i])
        wcets[i] += add
        rest -= Fraction(add, periods[i])
    if rest < 0 or rest > Fraction(1, 10**6):
        return None
    return wcets


def generate_taskset(params: GenParams, rng=None, name: str = "") -> TaskSet:
    """Implicit-deadline synchronous timers, RM priorities, delta = 0."""
    rng = params.rng() if rng is None else _rng(rng)
    keys, w = params.period_table()
    lo, hi = params.tasks
    n = int(rng.integers(lo, hi + 1))
    periods = [ms(int(p)) for p in rng.choice(keys, size=n, p=w)]
    while True:
        utils = uunifast_discard(n, params.utilization, rng)
        wcets = _fit_wcets(utils, periods, params.utilization)
        if wcets is not None:
            break
        # a task rounded to zero: give it a fresh period and try again
        for i, (u, p) in enumerate(zip(utils, periods)):
            if int(Fraction(repr(float(u))) * p) <= 0:
                periods[i] = ms(int(rng.choice(keys, p=w)))
    tasks = [TaskSpec(id=i, kind=TaskKind.TIMER, wcet=c, period=p, deadline=p, priority=i)
             for i, (c, p) in enumerate(zip(wcets, periods))]
    return assign_priorities(TaskSet(tasks, name=name), PriorityPolicy.RM)


def generate_chains(taskset: TaskSet, params: GenParams, rng=None) -> list[Chain]:
    rng = params.rng() if rng is None else _rng(rng)
    ids = [t.id for t in taskset.timers]
    lo, hi = params.chain_length
    if hi > len(ids):
        warnings.warn(f"chain length {hi} exceeds {len(ids)} timers; clamping", stacklevel=2)
    count = int(rng.integers(params.chains[0], params.chains[1] + 1))
    chains = []
    for cid in range(count):
        length = min(int(rng.integers(lo, hi + 1)), len(ids))
        picked = rng.choice(len(ids), size=length, replace=False)
        chains.append(Chain(cid, tuple(ids[i] for i in picked), ChainMode.SAMPLED))
    return chains


def generate_sequences(params: GenParams, rng=None, sequences: tuple[int, int] = (1, 3),
                       length: tuple[int, int] = (2, 4)) -> tuple[TaskSet, list[Chain]]:
    """Timer set where some timers head a pipeline of subscriptions.

    Each subscription declares its head's period as minimum inter-arrival
    and deadline. Chains are returned in sequence mode.
    """
    rng = params.rng() if rng is None else _rng(rng)
    base = generate_taskset(params, rng)
    heads = list(base.timers)
    k = min(int(rng.integers(sequences[0], sequences[1] + 1)), len(heads))
    picked = sorted(int(i) for i in rng.choice(len(heads), size=k, replace=False))
    tasks = {t.id: t for t in base}
    next_id = max(tasks) + 1
    chains = []
    for cid, h in enumerate(picked):
        head = heads[h]
        n_sub = int(rng.integers(length[0], length[1] + 1)) - 1
        # carve the subscriptions' budget out of the head's share
        shares = uunifast_discard(n_sub + 1, 1.0, rng)
        budget = head.wcet
        subs = [max(1, int(budget * s)) for s in shares[1:]]
        wcets = [max(1, budget - sum(subs))] + subs
        topic = 1000 + cid * 100
        tasks[head.id] = replace(head, wcet=wcets[0], publishes_to=topic)
        ids = [head.id]
        for j in range(n_sub):
            pub = topic + j + 1 if j < n_sub - 1 else None
            sub = TaskSpec(id=next_id, kind=TaskKind.SUBSCRIPTION, wcet=wcets[j + 1],
                           period=head.period, deadline=head.period, subscribes_to=topic + j,
                           publishes_to=pub, priority=next_id)
            tasks[next_id] = sub
            ids.append(next_id)
            next_id += 1
        chains.append(Chain(cid, tuple(ids), ChainMode.SEQUENCE))
    ts = TaskSet(tuple(tasks.values()), name=base.name)
    for c in chains:
        c.validate(ts)
    return ts, chains


CAMERA_WCET = {60: 10, 80: 14, 90: 16}


def casestudy(util: int) -> TaskSet:
    """Four cameras, two LiDARs and an IMU on one core, delta = 0.12 ms."""
    if util not in CAMERA_WCET:
        raise ModelError(f"case study exists for 60, 80 and 90 percent, not {util}")
    c = CAMERA_WCET[util]
    tasks = [TaskSpec.timer(i, c, 84, name=f"camera{i}") for i in range(4)]
    tasks += [TaskSpec.timer(4 + i, 10, 200, name=f"lidar{i}") for i in range(2)]
    tasks.append(TaskSpec.timer(6, 1, 30, name="imu"))
    tasks = [replace(t, priority=t.id) for t in tasks]
    ts = TaskSet(tasks, delta=ms("0.12"), name=f"casestudy{util}")
    return assign_priorities(ts, PriorityPolicy.RM)


def casestudy_chains() -> list[Chain]:
    """(IMU, last camera) and (last camera, last LiDAR), both sampled."""
    return [Chain(0, (6, 3), ChainMode.SAMPLED), Chain(1, (3, 5), ChainMode.SAMPLED)]
