"""Task, job and chain types shared by the simulator and the analysis.

All times are integer nanoseconds. Interfaces that speak milliseconds go
through :func:`ms` / :func:`to_ms`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import reduce

NS_PER_MS = 1_000_000


def ms(value) -> int:
    """Convert a millisecond quantity (int, float, str or Fraction) to ns."""
    if isinstance(value, float):
        value = Fraction(repr(value))
    return round(Fraction(value) * NS_PER_MS)


def to_ms(ns: int) -> float:
    return ns / NS_PER_MS


def fmt_ms(ns: int) -> str:
    """Exact decimal rendering of a nanosecond value in ms ("12.68", "30")."""
    sign = "-" if ns < 0 else ""
    whole, frac = divmod(abs(int(ns)), NS_PER_MS)
    text = f"{whole}.{frac:06d}".rstrip("0").rstrip(".")
    return sign + text


class TaskKind(str, enum.Enum):
    TIMER = "timer"
    SUBSCRIPTION = "subscription"


class PriorityPolicy(str, enum.Enum):
    FIFO = "fifo"
    FIXED = "fp"
    RM = "rm"
    EDF = "edf"


class ChainMode(str, enum.Enum):
    SEQUENCE = "sequence"
    SAMPLED = "sampled"


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class TaskSpec:
    id: int
    kind: TaskKind
    wcet: int
    period: int | None = None
    deadline: int | None = None
    phase: int = 0
    priority: int = 0
    subscribes_to: int | None = None
    publishes_to: int | None = None
    name: str = ""

    @property
    def is_timer(self) -> bool:
        return self.kind is TaskKind.TIMER

    def validate(self) -> None:
        if self.wcet < 0:
            raise ModelError(f"task {self.id}: negative wcet")
        if self.phase < 0:
            raise ModelError(f"task {self.id}: negative phase")
        if self.is_timer:
            if self.period is None or self.period <= 0:
                raise ModelError(f"task {self.id}: timer needs a positive period")
            if self.deadline is None:
                raise ModelError(f"task {self.id}: timer needs a deadline")
            if self.subscribes_to is not None:
                raise ModelError(f"task {self.id}: timers cannot subscribe")
        else:
            if self.subscribes_to is None:
                raise ModelError(f"task {self.id}: subscription without topic")
            if self.period is not None and self.period <= 0:
                raise ModelError(f"task {self.id}: non-positive inter-arrival")
            if self.phase:
                raise ModelError(f"task {self.id}: phase is for timers only")
        if self.deadline is not None:
            if self.deadline <= 0:
                raise ModelError(f"task {self.id}: deadline must be positive")
            if self.period is not None and self.deadline > self.period:
                raise ModelError(
                    f"task {self.id}: deadline exceeds period (constrained deadlines only)")

    @classmethod
    def timer(cls, id, wcet_ms, period_ms, deadline_ms=None, phase_ms=0, **kw):
        """Convenience constructor taking millisecond values."""
        period = ms(period_ms)
        deadline = period if deadline_ms is None else ms(deadline_ms)
        return cls(id=id, kind=TaskKind.TIMER, wcet=ms(wcet_ms), period=period,
                   deadline=deadline, phase=ms(phase_ms), **kw)

    @classmethod
    def subscription(cls, id, wcet_ms, topic, period_ms=None, deadline_ms=None, **kw):
        period = None if period_ms is None else ms(period_ms)
        if deadline_ms is not None:
            deadline = ms(deadline_ms)
        else:
            deadline = period
        return cls(id=id, kind=TaskKind.SUBSCRIPTION, wcet=ms(wcet_ms), period=period,
                   deadline=deadline, subscribes_to=topic, **kw)


@dataclass(frozen=True)
class TaskSet:
    tasks: tuple[TaskSpec, ...]
    delta: int = 0
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "tasks", tuple(self.tasks))
        self.validate()

    def validate(self) -> None:
        if self.delta < 0:
            raise ModelError("delta must be non-negative")
        ids = [t.id for t in self.tasks]
        if len(set(ids)) != len(ids):
            raise ModelError("duplicate task ids")
        prios = [t.priority for t in self.tasks]
        if len(set(prios)) != len(prios):
            raise ModelError("duplicate task priorities")
        for t in self.tasks:
            t.validate()
        _topic_order(self.tasks)

    def __len__(self):
        return len(self.tasks)

    def __iter__(self):
        return iter(self.tasks)

    def task(self, task_id: int) -> TaskSpec:
        for t in self.tasks:
            if t.id == task_id:
                return t
        raise KeyError(task_id)

    @property
    def timers(self) -> tuple[TaskSpec, ...]:
        return tuple(t for t in self.tasks if t.is_timer)

    @property
    def subscriptions(self) -> tuple[TaskSpec, ...]:
        return tuple(t for t in self.tasks if not t.is_timer)

    def utilization(self) -> float:
        return float(sum(Fraction(t.wcet, t.period) for t in self.tasks if t.period))

    def with_tasks(self, tasks) -> "TaskSet":
        return replace(self, tasks=tuple(tasks))


@dataclass(frozen=True)
class Chain:
    id: int
    task_ids: tuple[int, ...]
    mode: ChainMode = ChainMode.SAMPLED

    def __post_init__(self):
        object.__setattr__(self, "task_ids", tuple(self.task_ids))
        object.__setattr__(self, "mode", ChainMode(self.mode))
        if not self.task_ids:
            raise ModelError(f"chain {self.id} is empty")

    def validate(self, taskset: TaskSet) -> None:
        known = {t.id: t for t in taskset}
        for tid in self.task_ids:
            if tid not in known:
                raise ModelError(f"chain {self.id}: unknown task id {tid}")
        tasks = [known[i] for i in self.task_ids]
        if self.mode is ChainMode.SAMPLED:
            if not all(t.is_timer for t in tasks):
                raise ModelError(f"chain {self.id}: sampled chains are timers only")
            return
        if not tasks[0].is_timer:
            raise ModelError(f"chain {self.id}: sequence must start with a timer")
        for prev, cur in zip(tasks, tasks[1:]):
            if cur.is_timer or prev.publishes_to is None or cur.subscribes_to != prev.publishes_to:
                raise ModelError(
                    f"chain {self.id}: task {cur.id} is not activated by task {prev.id}")
            publishers = [t for t in taskset if t.publishes_to == cur.subscribes_to]
            if len(publishers) != 1:
                raise ModelError(
                    f"chain {self.id}: subscription {cur.id} needs exactly one activator")


@dataclass(frozen=True)
class Job:
    task_id: int
    index: int
    nominal_ts: int
    enqueue_t: int
    start_t: int
    finish_t: int
    abs_deadline: int | None
    skipped_before: int = 0
    parent: int = -1

    @property
    def response(self) -> int:
        return self.finish_t - self.nominal_ts


def _topic_order(tasks) -> None:
    """Reject publish/subscribe cycles; the simulator needs a finite job bound."""
    by_topic: dict[int, list[TaskSpec]] = {}
    for t in tasks:
        if t.subscribes_to is not None:
            by_topic.setdefault(t.subscribes_to, []).append(t)
    state: dict[int, int] = {}

    def visit(t):
        mark = state.get(t.id)
        if mark == 1:
            raise ModelError(f"publish/subscribe cycle through task {t.id}")
        if mark == 2:
            return
        state[t.id] = 1
        for nxt in by_topic.get(t.publishes_to, ()) if t.publishes_to is not None else ():
            visit(nxt)
        state[t.id] = 2

    for t in tasks:
        visit(t)


def hyperperiod(taskset: TaskSet) -> int:
    periods = [t.period for t in taskset.timers]
    if not periods:
        raise ModelError("empty hyperperiod")
    return reduce(math.lcm, periods)


def _rm_key(t: TaskSpec):
    return (t.period if t.period is not None else math.inf, t.id)


def assign_priorities(taskset: TaskSet, policy: PriorityPolicy) -> TaskSet:
    """Return a copy whose priorities 0..n-1 follow ``policy`` (RM or FP)."""
    policy = PriorityPolicy(policy)
    if policy is PriorityPolicy.RM:
        order = sorted(taskset.tasks, key=_rm_key)
    elif policy is PriorityPolicy.FIXED:
        order = sorted(taskset.tasks, key=lambda t: (t.priority, t.id))
    else:
        raise ModelError(f"no static priority assignment exists for {policy.value}")
    rank = {t.id: r for r, t in enumerate(order)}
    return taskset.with_tasks(replace(t, priority=rank[t.id]) for t in taskset.tasks)


def effective_ranks(taskset: TaskSet, policy: PriorityPolicy) -> dict[int, int]:
    """Dense static rank per task id (0 = most urgent).

    Timers rank by the policy (RM: period then id, otherwise the declared
    priority). A subscription fed by publishers inherits the best rank among
    them and sits directly behind its publisher, so a sequence stays
    contiguous in the order.
    """
    policy = PriorityPolicy(policy)
    if policy is PriorityPolicy.RM:
        base = {t.id: _rm_key(t) for t in taskset}
    else:
        base = {t.id: (t.priority, t.id) for t in taskset}
    publishers: dict[int, list[TaskSpec]] = {}
    for t in taskset:
        if t.publishes_to is not None:
            publishers.setdefault(t.publishes_to, []).append(t)
    memo: dict[int, tuple] = {}

    def key(t: TaskSpec):
        if t.id in memo:
            return memo[t.id]
        srcs = publishers.get(t.subscribes_to, []) if not t.is_timer else []
        if srcs:
            best = min(key(p) for p in srcs)
            k = best[:-1] + ((best[-1] + (t.id,)),)
        else:
            k = (base[t.id], ())
        memo[t.id] = k
        return k

    order = sorted(taskset.tasks, key=key)
    return {t.id: r for r, t in enumerate(order)}
