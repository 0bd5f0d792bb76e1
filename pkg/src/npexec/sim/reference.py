"""Ideal non-preemptive priority scheduler used as the oracle.

Deliberately independent from the executor kernels: plain Python with a
heap, no release overhead, no skipping. Every timestamp ``phase + k*period``
below the horizon becomes a job; subscriptions are released the instant
their publisher finishes.
"""
from __future__ import annotations

import heapq

import numpy as np

from ..model import ModelError, PriorityPolicy, TaskSet, effective_ranks
from .engine import JOB_DTYPE, ScheduleTrace, default_horizon


def reference_np_schedule(taskset: TaskSet, policy: PriorityPolicy,
                          horizon: int | None = None) -> ScheduleTrace:
    policy = PriorityPolicy(policy)
    if policy is PriorityPolicy.FIFO:
        raise ModelError("reference scheduler needs fp, rm or edf")
    if policy is PriorityPolicy.EDF and any(t.deadline is None for t in taskset.subscriptions):
        raise ModelError("EDF undefined for deadline-less subscription")
    if horizon is None:
        horizon = default_horizon(taskset)
    tasks = {t.id: t for t in taskset}
    rank = effective_ranks(taskset, PriorityPolicy.FIXED if policy is PriorityPolicy.EDF else policy)
    subscribers: dict[int, list[int]] = {}
    for t in taskset.subscriptions:
        subscribers.setdefault(t.subscribes_to, []).append(t.id)

    # pending timer releases: (timestamp, rank, task id)
    releases = [(t.phase, rank[t.id], t.id) for t in taskset.timers if t.phase < horizon]
    heapq.heapify(releases)
    ready: list[tuple] = []
    count = {tid: 0 for tid in tasks}
    seq = 0
    rows = []

    def push(tid, nominal, parent):
        nonlocal seq
        t = tasks[tid]
        absdl = -1 if t.deadline is None else nominal + t.deadline
        if policy is PriorityPolicy.EDF:
            key = (absdl, rank[tid], seq)
        else:
            key = (rank[tid], 0, seq)
        heapq.heappush(ready, (key, tid, count[tid], nominal, absdl, parent))
        count[tid] += 1
        seq += 1

    def release_until(now):
        while releases and releases[0][0] <= now:
            ts, _, tid = heapq.heappop(releases)
            push(tid, ts, -1)
            nxt = ts + tasks[tid].period
            if nxt < horizon:
                heapq.heappush(releases, (nxt, rank[tid], tid))

    now = 0
    while True:
        release_until(now)
        if not ready:
            if not releases:
                break
            now = releases[0][0]
            continue
        _, tid, index, nominal, absdl, parent = heapq.heappop(ready)
        start = now
        now = start + tasks[tid].wcet
        rows.append((tid, index, nominal, nominal, start, now, absdl, 0, parent, tasks[tid].wcet))
        row_id = len(rows) - 1
        release_until(now)
        for sid in subscribers.get(tasks[tid].publishes_to, ()) if tasks[tid].publishes_to is not None else ():
            push(sid, now, row_id)

    jobs = np.array(rows, dtype=JOB_DTYPE) if rows else np.empty(0, JOB_DTYPE)
    ids = tuple(t.id for t in taskset)
    return ScheduleTrace(jobs=jobs, drops=[], horizon=int(horizon), task_ids=ids,
                         released=np.array([count[i] for i in ids], np.int64))
