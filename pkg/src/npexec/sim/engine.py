from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ..model import ModelError, PriorityPolicy, TaskSet, effective_ranks, hyperperiod
from . import _kernels as K

JOB_DTYPE = np.dtype([
    ("task_id", np.int64),
    ("index", np.int64),
    ("nominal_ts", np.int64),
    ("enqueue_t", np.int64),
    ("start_t", np.int64),
    ("finish_t", np.int64),
    ("abs_deadline", np.int64),
    ("skipped_before", np.int64),
    ("parent", np.int64),
    ("exec_t", np.int64),
])


class Variant(str, enum.Enum):
    DEFAULT = "default"
    EVENTS_FIFO_RO = "events-fifo-ro"
    EVENTS_FIFO_RE = "events-fifo-re"
    PRIORITY_RO = "priority-ro"
    PRIORITY_RE = "priority-re"

    @property
    def is_ro(self) -> bool:
        return self in (Variant.EVENTS_FIFO_RO, Variant.PRIORITY_RO)


@dataclass(frozen=True)
class ExecutorConfig:
    variant: Variant
    policy: PriorityPolicy = PriorityPolicy.FIFO
    delta: int = 0
    timer_thread_elevated: bool = True
    queue_depth: int = 10
    wcet_min_fraction: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "policy", PriorityPolicy(self.policy))
        v, p = self.variant, self.policy
        if v in (Variant.PRIORITY_RO, Variant.PRIORITY_RE) and p is PriorityPolicy.FIFO:
            raise ModelError(f"{v.value} needs a priority policy (fp, rm or edf)")
        if v in (Variant.EVENTS_FIFO_RO, Variant.EVENTS_FIFO_RE) and p is not PriorityPolicy.FIFO:
            raise ModelError(f"{v.value} only supports FIFO ordering")
        if self.delta < 0:
            raise ModelError("delta must be non-negative")
        if self.queue_depth < 1:
            raise ModelError("queue depth must be at least 1")
        if self.wcet_min_fraction is not None and not 0 <= self.wcet_min_fraction <= 1:
            raise ModelError("wcet_min_fraction must lie in [0, 1]")


# CLI executor names -> (variant, policy)
EXECUTORS = {
    "default": (Variant.DEFAULT, PriorityPolicy.FIFO),
    "events-fifo-ro": (Variant.EVENTS_FIFO_RO, PriorityPolicy.FIFO),
    "events-fifo-re": (Variant.EVENTS_FIFO_RE, PriorityPolicy.FIFO),
    "rm-ro": (Variant.PRIORITY_RO, PriorityPolicy.RM),
    "rm-re": (Variant.PRIORITY_RE, PriorityPolicy.RM),
    "edf-ro": (Variant.PRIORITY_RO, PriorityPolicy.EDF),
    "edf-re": (Variant.PRIORITY_RE, PriorityPolicy.EDF),
    "fp-ro": (Variant.PRIORITY_RO, PriorityPolicy.FIXED),
    "fp-re": (Variant.PRIORITY_RE, PriorityPolicy.FIXED),
}


def executor_config(name: str, delta: int = 0, **kw) -> ExecutorConfig:
    try:
        variant, policy = EXECUTORS[name]
    except KeyError:
        raise ModelError(f"unknown executor {name!r}") from None
    return ExecutorConfig(variant, policy, delta, **kw)


@dataclass
class ScheduleTrace:
    """Completed jobs in start order, drop events and per-task release counts.

    ``task_ids[k]`` maps the task position used in ``released`` back to the
    TaskSpec id; the ``jobs`` and ``drops`` tables already carry ids.
    """
    jobs: np.ndarray
    drops: list[tuple[int, int, int]]
    horizon: int
    task_ids: tuple[int, ...] = ()
    released: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))

    def records(self):
        from ..model import Job
        for r in self.jobs.tolist():
            yield Job(task_id=r[0], index=r[1], nominal_ts=r[2], enqueue_t=r[3],
                      start_t=r[4], finish_t=r[5],
                      abs_deadline=None if r[6] < 0 else r[6],
                      skipped_before=r[7], parent=r[8])

    def of_task(self, task_id: int) -> np.ndarray:
        return self.jobs[self.jobs["task_id"] == task_id]

    def intervals(self) -> list[tuple[int, int, int]]:
        j = self.jobs
        return list(zip(j["task_id"].tolist(), j["start_t"].tolist(), j["finish_t"].tolist()))


def next_timestamp(ts: int, period: int, now: int) -> tuple[int, int]:
    """Smallest ``ts + k*period`` strictly after ``now`` and the periods skipped."""
    if period <= 0 or now < ts:
        raise ValueError("next_timestamp needs period > 0 and now >= ts")
    new_ts, skipped = K.next_timestamp(ts, period, now)
    return int(new_ts), int(skipped)


def default_horizon(taskset: TaskSet, hyperperiods: int = 2) -> int:
    return max(t.phase for t in taskset.timers) + hyperperiods * hyperperiod(taskset)


def job_bounds(taskset: TaskSet, horizon: int) -> list[int]:
    """Upper bound on released jobs per task (timers: timestamps below horizon)."""
    tasks = taskset.tasks
    by_topic: dict[int, list[int]] = {}
    for k, t in enumerate(tasks):
        if t.publishes_to is not None:
            by_topic.setdefault(t.publishes_to, []).append(k)
    memo: dict[int, int] = {}

    def bound(k):
        if k in memo:
            return memo[k]
        t = tasks[k]
        if t.is_timer:
            b = 0 if t.phase >= horizon else -(-(horizon - t.phase) // t.period)
        else:
            b = sum(bound(p) for p in by_topic.get(t.subscribes_to, ()))
        memo[k] = b
        return b

    return [bound(k) for k in range(len(tasks))]


def _arrays(taskset: TaskSet, policy: PriorityPolicy):
    tasks = taskset.tasks
    n = len(tasks)
    kind = np.array([K.TIMER if t.is_timer else K.SUBSCRIPTION for t in tasks], np.int64)
    wcet = np.array([t.wcet for t in tasks], np.int64)
    period = np.array([t.period or 0 for t in tasks], np.int64)
    phase = np.array([t.phase for t in tasks], np.int64)
    rel_dl = np.array([-1 if t.deadline is None else t.deadline for t in tasks], np.int64)
    rank_policy = PriorityPolicy.FIXED if policy in (PriorityPolicy.FIFO, PriorityPolicy.EDF) else policy
    ranks = effective_ranks(taskset, rank_policy)
    rank = np.array([ranks[t.id] for t in tasks], np.int64)
    subs_of: list[list[int]] = [[] for _ in range(n)]
    for k, t in enumerate(tasks):
        if t.publishes_to is None:
            continue
        for j, s in enumerate(tasks):
            if not s.is_timer and s.subscribes_to == t.publishes_to:
                subs_of[k].append(j)
    sub_ptr = np.zeros(n + 1, np.int64)
    sub_ptr[1:] = np.cumsum([len(s) for s in subs_of])
    sub_idx = np.array([j for s in subs_of for j in s], np.int64)
    return kind, wcet, period, phase, rel_dl, rank, sub_ptr, sub_idx


def _exec_table(taskset: TaskSet, bounds, fraction, seed):
    n = len(taskset)
    if fraction is None:
        return np.zeros((n, 0), np.int64)
    rng = np.random.default_rng(seed)
    width = max(max(bounds), 1)
    u = rng.random((n, width))
    wcet = np.array([t.wcet for t in taskset], np.int64)
    lo = np.ceil(wcet * fraction).astype(np.int64)
    span = wcet - lo + 1
    tab = lo[:, None] + np.floor(u * span[:, None]).astype(np.int64)
    return np.minimum(tab, wcet[:, None])


def simulate(taskset: TaskSet, config: ExecutorConfig, horizon: int | None = None,
             seed: int = 0) -> ScheduleTrace:
    """Run one executor variant over ``[0, horizon)`` and drain the backlog.

    Timers release only timestamps below the horizon; everything released
    (and everything it activates) runs to completion, so each trace holds
    complete jobs only.
    """
    if not taskset.tasks:
        raise ModelError("empty task set")
    if horizon is None:
        horizon = default_horizon(taskset)
    if horizon <= 0:
        raise ModelError("horizon must be positive")
    policy = config.policy
    if policy is PriorityPolicy.EDF:
        for t in taskset.subscriptions:
            if t.deadline is None:
                raise ModelError("EDF undefined for deadline-less subscription")
        if config.variant in (Variant.PRIORITY_RO, Variant.PRIORITY_RE):
            for t in taskset.timers:
                if t.deadline != t.period:
                    raise ModelError("EDF executor keys need implicit timer deadlines")
    kind, wcet, period, phase, rel_dl, rank, sub_ptr, sub_idx = _arrays(taskset, policy)
    bounds = job_bounds(taskset, horizon)
    cap = int(sum(bounds)) + 1
    exec_tab = _exec_table(taskset, bounds, config.wcet_min_fraction, seed)
    depth = int(config.queue_depth)
    delta = int(config.delta)
    pcode = {PriorityPolicy.FIFO: K.P_FIFO, PriorityPolicy.FIXED: K.P_STATIC,
             PriorityPolicy.RM: K.P_STATIC, PriorityPolicy.EDF: K.P_EDF}[policy]
    v = config.variant
    if v is Variant.DEFAULT:
        tasks = taskset.tasks
        order = sorted(range(len(tasks)),
                       key=lambda k: (not tasks[k].is_timer, tasks[k].priority, tasks[k].id))
        out, drops, count = K.default_kernel(kind, wcet, period, phase, rel_dl,
                                             np.array(order, np.int64), sub_ptr, sub_idx,
                                             horizon, exec_tab, depth, cap)
    elif v.is_ro:
        out, drops, count = K.ro_kernel(kind, wcet, period, phase, rel_dl, rank, pcode,
                                        bool(config.timer_thread_elevated), sub_ptr, sub_idx,
                                        delta, horizon, exec_tab, depth, cap)
    else:
        out, drops, count = K.re_kernel(kind, wcet, period, phase, rel_dl, rank, pcode,
                                        v is Variant.PRIORITY_RE, sub_ptr, sub_idx,
                                        delta, horizon, exec_tab, depth, cap)
    return _wrap(taskset, out, drops, count, horizon)


def _wrap(taskset, out, drops, count, horizon) -> ScheduleTrace:
    ids = np.array([t.id for t in taskset.tasks], np.int64)
    jobs = np.empty(len(out), JOB_DTYPE)
    for c, name in enumerate(JOB_DTYPE.names):
        jobs[name] = out[:, c]
    jobs["task_id"] = ids[out[:, K.TASK]] if len(out) else jobs["task_id"]
    drop_list = [(int(ids[d[0]]), int(d[1]), int(d[2])) for d in drops.tolist()]
    return ScheduleTrace(jobs=jobs, drops=drop_list, horizon=int(horizon),
                         task_ids=tuple(ids.tolist()), released=np.asarray(count, np.int64))
