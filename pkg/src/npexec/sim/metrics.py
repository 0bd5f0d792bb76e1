from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..model import Chain, ChainMode, ModelError, TaskSet, fmt_ms
from .engine import ScheduleTrace


class LatencyError(ModelError):
    pass


@dataclass
class TaskMetrics:
    task_id: int
    released: int
    executed: int
    dropped: int
    max_response: int | None
    mean_response: float | None
    deadline_misses: int

    def as_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "released": self.released,
            "executed": self.executed,
            "dropped": self.dropped,
            "max_response_ms": None if self.max_response is None else fmt_ms(self.max_response),
            "mean_response_ms": None if self.mean_response is None else round(self.mean_response / 1e6, 6),
            "deadline_misses": self.deadline_misses,
        }


@dataclass
class SimMetrics:
    tasks: dict[int, TaskMetrics]
    chains: dict[int, int | None] = field(default_factory=dict)

    @property
    def total_dropped(self) -> int:
        return sum(m.dropped for m in self.tasks.values())

    @property
    def total_misses(self) -> int:
        return sum(m.deadline_misses for m in self.tasks.values())

    def as_dict(self) -> dict:
        return {
            "tasks": [m.as_dict() for m in self.tasks.values()],
            "chains": [{"chain_id": cid, "max_latency_ms": None if v is None else fmt_ms(v)}
                       for cid, v in self.chains.items()],
        }


def compute_metrics(trace: ScheduleTrace, taskset: TaskSet, chains=()) -> SimMetrics:
    jobs = trace.jobs
    dropped: dict[int, int] = {}
    for task_id, _, n in trace.drops:
        dropped[task_id] = dropped.get(task_id, 0) + n
    released = dict(zip(trace.task_ids, trace.released.tolist()))
    out = {}
    for t in taskset:
        mine = jobs[jobs["task_id"] == t.id]
        resp = mine["finish_t"] - mine["nominal_ts"]
        dl = mine["abs_deadline"]
        misses = int(np.count_nonzero((dl >= 0) & (mine["finish_t"] > dl)))
        out[t.id] = TaskMetrics(
            task_id=t.id,
            released=int(released.get(t.id, len(mine))),
            executed=len(mine),
            dropped=dropped.get(t.id, 0),
            max_response=int(resp.max()) if len(resp) else None,
            mean_response=float(resp.mean()) if len(resp) else None,
            deadline_misses=misses,
        )
    known = {t.id for t in taskset}
    lat = {}
    for c in chains:
        for tid in c.task_ids:
            if tid not in known:
                raise ModelError(f"chain {c.id}: unknown task id {tid}")
        try:
            lat[c.id] = measure_latency(trace, c)
        except LatencyError:
            lat[c.id] = None
    return SimMetrics(out, lat)


def measure_latency(trace: ScheduleTrace, chain: Chain) -> int:
    if chain.mode is ChainMode.SEQUENCE:
        return measure_sequence_latency(trace, chain)
    return measure_sampled_latency(trace, chain)


def measure_sequence_latency(trace: ScheduleTrace, chain: Chain) -> int:
    """Max over head jobs of (finish of the last stage fed by it - head timestamp)."""
    if chain.mode is not ChainMode.SEQUENCE:
        raise ModelError("sequence latency needs a sequence chain")
    jobs = trace.jobs
    task = jobs["task_id"]
    parent = jobs["parent"]
    child = {}
    for row in np.flatnonzero(parent >= 0).tolist():
        child[(int(parent[row]), int(task[row]))] = row
    best = None
    for head in np.flatnonzero(task == chain.task_ids[0]).tolist():
        row = head
        for tid in chain.task_ids[1:]:
            row = child.get((row, tid))
            if row is None:
                break
        if row is None:
            continue
        lat = int(jobs["finish_t"][row] - jobs["nominal_ts"][head])
        best = lat if best is None else max(best, lat)
    if best is None:
        raise LatencyError(f"chain {chain.id}: no complete propagation")
    return best


def sampled_propagation(trace: ScheduleTrace, chain: Chain) -> tuple[np.ndarray, np.ndarray]:
    """Per head job: its start and the finish of the tail job that first
    reflects data read by it (-1 when the propagation is cut by the horizon).

    Registers are last-is-best: a job reads its input at start and writes at
    finish, so stage k+1 picks the first job starting at or after stage k's
    finish.
    """
    jobs = trace.jobs
    head = jobs[jobs["task_id"] == chain.task_ids[0]]
    starts = head["start_t"].astype(np.int64)
    written = head["finish_t"].astype(np.int64)
    alive = np.ones(len(head), bool)
    for tid in chain.task_ids[1:]:
        stage = jobs[jobs["task_id"] == tid]
        s = stage["start_t"]
        idx = np.searchsorted(s, written, side="left")
        alive &= idx < len(s)
        idx = np.minimum(idx, max(len(s) - 1, 0))
        written = stage["finish_t"][idx] if len(s) else written
    return starts, np.where(alive, written, -1)


def measure_sampled_latency(trace: ScheduleTrace, chain: Chain) -> int:
    """Maximum reaction time: a cause arriving right after a head read is
    picked up by the next head job and is processed once the chain tail
    finishes its propagation."""
    if chain.mode is not ChainMode.SAMPLED:
        raise ModelError("sampled latency needs a sampled chain")
    starts, done = sampled_propagation(trace, chain)
    if len(starts) < 2:
        raise LatencyError(f"chain {chain.id}: no complete propagation")
    lat = done[1:] - starts[:-1]
    ok = done[1:] >= 0
    if not ok.any():
        raise LatencyError(f"chain {chain.id}: no complete propagation")
    return int(lat[ok].max())
