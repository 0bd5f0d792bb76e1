"""Task-set files (JSON) and trace / drop CSVs."""
from __future__ import annotations

import csv
import json
from pathlib import Path

from .model import Chain, ChainMode, ModelError, TaskKind, TaskSet, TaskSpec, fmt_ms, ms


def taskset_to_dict(taskset: TaskSet, chains=()) -> dict:
    tasks = []
    for t in taskset:
        row = {
            "id": t.id,
            "kind": t.kind.value,
            "wcet_ms": fmt_ms(t.wcet),
            "period_ms": None if t.period is None else fmt_ms(t.period),
            "deadline_ms": None if t.deadline is None else fmt_ms(t.deadline),
            "phase_ms": fmt_ms(t.phase),
            "priority": t.priority,
            "subscribes_to": t.subscribes_to,
            "publishes_to": t.publishes_to,
        }
        if t.name:
            row["name"] = t.name
        tasks.append(row)
    return {
        "name": taskset.name,
        "delta_ms": fmt_ms(taskset.delta),
        "tasks": tasks,
        "chains": [{"id": c.id, "mode": c.mode.value, "task_ids": list(c.task_ids)}
                   for c in chains],
    }


def taskset_from_dict(data: dict) -> tuple[TaskSet, list[Chain]]:
    tasks = []
    try:
        for row in data["tasks"]:
            kind = TaskKind(row.get("kind", "timer"))
            period = row.get("period_ms")
            period = None if period is None else ms(period)
            deadline = row.get("deadline_ms")
            deadline = period if deadline is None else ms(deadline)
            tasks.append(TaskSpec(
                id=int(row["id"]),
                kind=kind,
                wcet=ms(row["wcet_ms"]),
                period=period,
                deadline=deadline,
                phase=ms(row.get("phase_ms") or 0),
                priority=int(row.get("priority", row["id"])),
                subscribes_to=row.get("subscribes_to"),
                publishes_to=row.get("publishes_to"),
                name=row.get("name", ""),
            ))
        taskset = TaskSet(tuple(tasks), delta=ms(data.get("delta_ms") or 0),
                          name=data.get("name", ""))
        chains = [Chain(int(c["id"]), tuple(c["task_ids"]), ChainMode(c.get("mode", "sampled")))
                  for c in data.get("chains", [])]
    except (KeyError, TypeError) as exc:
        raise ModelError(f"malformed task-set file: {exc!r}") from exc
    for c in chains:
        c.validate(taskset)
    return taskset, chains


def load_taskset(path) -> tuple[TaskSet, list[Chain]]:
    with open(path) as fh:
        return taskset_from_dict(json.load(fh))


def dump_taskset(path, taskset: TaskSet, chains=()) -> None:
    Path(path).write_text(json.dumps(taskset_to_dict(taskset, chains), indent=2) + "\n")


TRACE_COLUMNS = ("task_id", "index", "nominal_ts_ns", "enqueue_ns", "start_ns",
                 "finish_ns", "abs_deadline_ns", "skipped_before")
DROP_COLUMNS = ("task_id", "skipped_at_ns", "count")


def write_trace_csv(path, trace) -> None:
    jobs = trace.jobs
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for row in zip(jobs["task_id"].tolist(), jobs["index"].tolist(),
                       jobs["nominal_ts"].tolist(), jobs["enqueue_t"].tolist(),
                       jobs["start_t"].tolist(), jobs["finish_t"].tolist(),
                       jobs["abs_deadline"].tolist(), jobs["skipped_before"].tolist()):
            row = list(row)
            if row[6] < 0:
                row[6] = ""
            w.writerow(row)


def write_drops_csv(path, trace) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DROP_COLUMNS)
        for task_id, ts, count in trace.drops:
            w.writerow((task_id, ts, count))
