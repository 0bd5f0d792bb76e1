"""Overhead -> response-time bound -> chain latency bound."""
from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field, replace

from ..model import (PriorityPolicy, TaskKind, TaskSet, effective_ranks, fmt_ms)
from .bounds import (AnalysisError, e2e_bound, edf_schedulable, overhead_re, overhead_ro,
                     overhead_tightened, wcrt_np_fp_all)


class ReleaseOption(str, enum.Enum):
    RO = "ro"
    RE = "re"


@dataclass
class TaskBound:
    task_id: int
    overhead: int
    inflated_wcet: int
    deadline: int
    wcrt: int | None
    wcrt_tightened: int | None = None

    @property
    def meets_deadline(self) -> bool:
        return self.wcrt is not None and self.wcrt <= self.deadline

    @property
    def bound(self) -> int | None:
        """Tightest certified bound (the tightened one when it exists)."""
        return self.wcrt_tightened if self.wcrt_tightened is not None else self.wcrt


@dataclass
class AnalysisReport:
    policy: PriorityPolicy
    option: ReleaseOption
    delta: int
    tasks: dict[int, TaskBound]
    chains: dict[int, int | None] = field(default_factory=dict)

    @property
    def schedulable(self) -> bool:
        return all(b.meets_deadline for b in self.tasks.values())

    def wcrts(self) -> dict[int, int | None]:
        return {tid: b.bound for tid, b in self.tasks.items()}

    def write_csv(self, tasks_path, chains_path=None) -> None:
        with open(tasks_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("task_id", "delta_ms", "inflated_wcet_ms", "wcrt_ms", "deadline_ms",
                        "meets_deadline"))
            for b in self.tasks.values():
                w.writerow((b.task_id, fmt_ms(b.overhead), fmt_ms(b.inflated_wcet),
                            "" if b.bound is None else fmt_ms(b.bound), fmt_ms(b.deadline),
                            str(b.meets_deadline).lower()))
        if chains_path is not None:
            with open(chains_path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(("chain_id", "latency_bound_ms"))
                for cid, lat in self.chains.items():
                    w.writerow((cid, "" if lat is None else fmt_ms(lat)))

    def as_dict(self) -> dict:
        return {
            "policy": self.policy.value,
            "option": self.option.value,
            "delta_ms": fmt_ms(self.delta),
            "schedulable": self.schedulable,
            "tasks": [{
                "task_id": b.task_id,
                "delta_ms": fmt_ms(b.overhead),
                "inflated_wcet_ms": fmt_ms(b.inflated_wcet),
                "wcrt_ms": None if b.wcrt is None else fmt_ms(b.wcrt),
                "wcrt_tightened_ms": None if b.wcrt_tightened is None else fmt_ms(b.wcrt_tightened),
                "deadline_ms": fmt_ms(b.deadline),
                "meets_deadline": b.meets_deadline,
            } for b in self.tasks.values()],
            "chains": [{"chain_id": cid, "latency_bound_ms": None if v is None else fmt_ms(v)}
                       for cid, v in self.chains.items()],
        }


def _inflate(taskset: TaskSet, overheads: dict[int, int]) -> TaskSet:
    return taskset.with_tasks(replace(t, wcet=t.wcet + overheads[t.id]) for t in taskset)


def _bounds(inflated: TaskSet, policy: PriorityPolicy) -> dict[int, int | None]:
    if policy is PriorityPolicy.EDF:
        ok = edf_schedulable(inflated)
        return {t.id: (t.deadline if ok else None) for t in inflated}
    ranks = effective_ranks(inflated, policy)
    ranked = inflated.with_tasks(replace(t, priority=ranks[t.id]) for t in inflated)
    return wcrt_np_fp_all(ranked)


def analyze(taskset: TaskSet, policy, option, delta: int | None = None, chains=()) -> AnalysisReport:
    policy = PriorityPolicy(policy)
    option = ReleaseOption(option)
    if policy is PriorityPolicy.FIFO:
        raise AnalysisError("FIFO ordering has no priority-based bound")
    if taskset.subscriptions:
        raise AnalysisError("subscription tasks are outside the timer analysis")
    delta = taskset.delta if delta is None else delta
    n = len(taskset)

    if option is ReleaseOption.RE:
        overheads = {t.id: overhead_re(n, delta) for t in taskset}
    else:
        overheads = {t.id: overhead_ro(taskset, t.id, delta) for t in taskset}
    inflated = _inflate(taskset, overheads)
    wcrt = _bounds(inflated, policy)
    tasks = {t.id: TaskBound(t.id, overheads[t.id], inflated.task(t.id).wcet, t.deadline, wcrt[t.id])
             for t in taskset}
    report = AnalysisReport(policy, option, delta, tasks)

    # a proven-schedulable RO set may re-run with one release per task
    if report.schedulable and option is ReleaseOption.RO and policy is not PriorityPolicy.EDF:
        tight = overhead_tightened(n, delta, schedulable_proven=True)
        if any(o > tight for o in overheads.values()):
            again = _bounds(_inflate(taskset, {t.id: min(overheads[t.id], tight) for t in taskset}),
                            policy)
            for tid, b in tasks.items():
                b.wcrt_tightened = again[tid]

    wcrts = report.wcrts()
    for c in chains:
        try:
            report.chains[c.id] = e2e_bound(c, taskset, wcrts)
        except AnalysisError:
            report.chains[c.id] = None
    return report


def periodic_view(taskset: TaskSet, policy=PriorityPolicy.RM) -> TaskSet:
    """Timers-only stand-in for a set with timer-headed sequences.

    Each subscription becomes a periodic task with its declared minimum
    inter-arrival time as period, and priorities follow the executor's
    inherited order. Used to bound sequence latencies; the activation
    jitter of subscriptions is not modelled, so treat the result as an
    estimate rather than a proof.
    """
    ranks = effective_ranks(taskset, policy)
    tasks = []
    for t in taskset:
        if not t.is_timer and t.period is None:
            raise AnalysisError(f"subscription {t.id} has no declared inter-arrival time")
        tasks.append(replace(t, kind=TaskKind.TIMER, subscribes_to=None, publishes_to=None,
                             priority=ranks[t.id]))
    return taskset.with_tasks(tasks)
