"""Release overhead, non-preemptive FP/EDF tests and the chain latency sum."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from ..model import ModelError, TaskSet, TaskSpec, hyperperiod
from . import _kernels


class AnalysisError(ModelError):
    pass


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def overhead_re(n: int, delta: int) -> int:
    """Release-and-execute: at most one release per task ahead of a job."""
    if n < 1 or delta < 0:
        raise ValueError("need n >= 1 and delta >= 0")
    return n * delta


def overhead_ro(taskset: TaskSet, task_id: int, delta: int) -> int:
    """Release-only overhead charged to one job of ``task_id``.

    Finds the smallest t0 with t0 >= C_i + sum_j ceil(t0/T_j)*delta by
    iteration from C_i + n*delta and returns the release count at t0 times
    delta.
    """
    if delta < 0:
        raise ValueError("delta must be non-negative")
    if delta == 0:
        return 0
    timers = taskset.timers
    periods = [t.period for t in timers]
    wcet = taskset.task(task_id).wcet
    limit = hyperperiod(taskset)
    t = wcet + len(periods) * delta
    while True:
        releases = sum(_ceil_div(t, p) for p in periods)
        nxt = wcet + releases * delta
        if nxt == t:
            return releases * delta
        if nxt > limit:
            raise AnalysisError("overhead unbounded at this utilization")
        t = nxt


def overhead_tightened(n: int, delta: int, *, schedulable_proven: bool = False) -> int:
    """One release per other task; only valid once schedulability is shown."""
    if not schedulable_proven:
        raise AnalysisError("tightening requires prior schedulability proof")
    return n * delta


def priority_order(taskset: TaskSet) -> list[TaskSpec]:
    return sorted(taskset.tasks, key=lambda t: (t.priority, t.id))


def wcrt_np_fp_all(taskset: TaskSet) -> dict[int, int | None]:
    """Bounds for every task, ordered by TaskSpec.priority; wcets taken as given."""
    order = priority_order(taskset)
    for t in order:
        if t.period is None:
            raise AnalysisError(f"task {t.id} has no period")
    C = np.array([t.wcet for t in order], np.int64)
    T = np.array([t.period for t in order], np.int64)
    D = np.array([t.deadline for t in order], np.int64)
    R = _kernels.wcrt_fp(C, T, D)
    return {t.id: (None if r < 0 else int(r)) for t, r in zip(order, R.tolist())}


def wcrt_np_fp(taskset: TaskSet, task_id: int) -> int | None:
    return wcrt_np_fp_all(taskset)[task_id]


def dbf(task: TaskSpec, t: int) -> int:
    if t < task.deadline:
        return 0
    return ((t - task.deadline) // task.period + 1) * task.wcet


def busy_period(taskset: TaskSet) -> int:
    """Synchronous busy period including one blocking job, capped by the hyperperiod."""
    C = [t.wcet for t in taskset]
    T = [t.period for t in taskset]
    limit = hyperperiod(taskset)
    block = max(C)
    t = block + sum(C)
    while t <= limit:
        nxt = block + sum(_ceil_div(t, p) * c for p, c in zip(T, C))
        if nxt == t:
            break
        t = nxt
    return min(t, limit)


def edf_schedulable(taskset: TaskSet) -> bool:
    """Non-preemptive EDF demand test at every absolute deadline up to the busy period."""
    tasks = taskset.tasks
    if sum(Fraction(t.wcet, t.period) for t in tasks) > 1:
        return False
    L = busy_period(taskset)
    return _kernels.edf_test([t.wcet for t in tasks], [t.period for t in tasks],
                             [t.deadline for t in tasks], L)


def e2e_bound(chain, taskset: TaskSet, wcrts: dict) -> int:
    """Sum of period plus response bound over the chain's tasks."""
    total = 0
    for tid in chain.task_ids:
        task = taskset.task(tid)
        r = wcrts.get(tid)
        if r is None or task.period is None:
            raise AnalysisError(f"chain {chain.id}: chain task unbounded ({tid})")
        total += task.period + r
    return total
