"""npexec command line: generate, analyze, simulate, compare.

Exit codes: 0 ok / schedulable, 2 usage error, 3 unschedulable,
4 unsupported input (subscriptions handed to the timer analysis).
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import gen
from .analysis import AnalysisError, analyze, periodic_view
from .io import dump_taskset, load_taskset, write_drops_csv, write_trace_csv
from .model import ModelError, PriorityPolicy, fmt_ms, hyperperiod
from .sim import (EXECUTORS, LatencyError, compute_metrics, executor_config, measure_latency,
                  reference_np_schedule, simulate)

EXIT_OK, EXIT_USAGE, EXIT_UNSCHEDULABLE, EXIT_UNSUPPORTED = 0, 2, 3, 4

_UNITS = {"ns": 1, "us": 1_000, "ms": 1_000_000, "s": 1_000_000_000}
_DURATION = re.compile(r"^\s*([0-9]*\.?[0-9]+)\s*(ns|us|ms|s)?\s*$")


class UsageError(Exception):
    pass


def duration(text: str) -> int:
    """'0.12' and '0.12ms' are milliseconds; us, ns and s suffixes also work."""
    m = _DURATION.match(text)
    if not m:
        raise argparse.ArgumentTypeError(f"bad duration {text!r}")
    value, unit = m.groups()
    return round(Fraction(value) * _UNITS[unit or "ms"])


def int_range(text: str) -> tuple[int, int]:
    """'50' or '10:200'."""
    try:
        parts = [int(p) for p in text.split(":")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}") from None
    if len(parts) == 1:
        parts *= 2
    if len(parts) != 2 or parts[0] > parts[1] or parts[0] < 1:
        raise argparse.ArgumentTypeError(f"bad range {text!r}")
    return parts[0], parts[1]


def period_weights(text: str) -> dict:
    """'10:0.25,20:0.25,100:0.2' (weights are renormalised)."""
    out = {}
    try:
        for item in text.split(","):
            p, w = item.split(":")
            out[int(p)] = float(w)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad period weights {text!r}") from None
    return out


def _default_seed() -> int:
    env = os.environ.get("NPEXEC_SEED")
    try:
        return int(env) if env else 0
    except ValueError:
        return 0


# -- generate ---------------------------------------------------------------

def cmd_generate(args) -> int:
    if args.casestudy is not None:
        ts = gen.casestudy(args.casestudy)
        chains = gen.casestudy_chains()
    else:
        if not 0 < args.utilization <= 1:
            raise UsageError("utilization must lie in (0, 1]")
        kw = dict(utilization=args.utilization, tasks=args.tasks, chains=args.chains,
                  chain_length=args.chain_length, seed=args.seed)
        if args.periods:
            kw["periods"] = args.periods
        params = gen.GenParams(**kw)
        if args.sequences:
            ts, chains = gen.generate_sequences(params)
        else:
            rng = params.rng()
            ts = gen.generate_taskset(params, rng, name=f"gen-u{args.utilization}-s{args.seed}")
            chains = gen.generate_chains(ts, params, rng)
        if args.delta is not None:
            ts = replace(ts, delta=args.delta)
    dump_taskset(args.output, ts, chains)
    hp = hyperperiod(ts)
    print(f"wrote {args.output}: n={len(ts)} U={ts.utilization():.6f} "
          f"hyperperiod={fmt_ms(hp)} ms chains={len(chains)}")
    return EXIT_OK


# -- analyze ----------------------------------------------------------------

def cmd_analyze(args) -> int:
    ts, chains = load_taskset(args.taskset)
    delta = ts.delta if args.delta is None else args.delta
    if ts.subscriptions:
        print("error: subscription tasks are outside the timer analysis", file=sys.stderr)
        return EXIT_UNSUPPORTED
    try:
        report = analyze(ts, args.policy, args.option, delta, chains)
    except AnalysisError as exc:
        print(f"NOT schedulable: {exc}")
        return EXIT_UNSCHEDULABLE
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.taskset).stem
    report.write_csv(out / f"{stem}-bounds.csv", out / f"{stem}-chains.csv")
    (out / f"{stem}-report.json").write_text(json.dumps(report.as_dict(), indent=2) + "\n")
    for b in report.tasks.values():
        r = "-" if b.bound is None else fmt_ms(b.bound)
        print(f"task {b.task_id}: delta={fmt_ms(b.overhead)} C'={fmt_ms(b.inflated_wcet)} "
              f"R={r} D={fmt_ms(b.deadline)} {'ok' if b.meets_deadline else 'MISS'}")
    print("schedulable" if report.schedulable else "NOT schedulable")
    return EXIT_OK if report.schedulable else EXIT_UNSCHEDULABLE


# -- simulate ---------------------------------------------------------------

def _horizon(ts, args) -> int:
    if args.horizon is not None:
        return args.horizon
    return max(t.phase for t in ts) + args.hyperperiods * hyperperiod(ts)


def _run_sim(ts, executor: str, policy: str | None, delta: int, horizon: int, seed: int,
             wcet_min_fraction: float | None):
    if executor == "reference":
        return reference_np_schedule(ts, policy or "rm", horizon)
    cfg = executor_config(executor, delta, wcet_min_fraction=wcet_min_fraction)
    return simulate(ts, cfg, horizon, seed)


def _simulate_one(job):
    path, executor, args = job
    ts, chains = load_taskset(path)
    delta = ts.delta if args["delta"] is None else args["delta"]
    horizon = args["horizon"] if args["horizon"] is not None else \
        max(t.phase for t in ts) + args["hyperperiods"] * hyperperiod(ts)
    trace = _run_sim(ts, executor, args["policy"], delta, horizon, args["seed"],
                     args["wcet_min_fraction"])
    metrics = compute_metrics(trace, ts, chains)
    out = Path(args["output"])
    stem = f"{Path(path).stem}-{executor}"
    write_trace_csv(out / f"{stem}-trace.csv", trace)
    write_drops_csv(out / f"{stem}-drops.csv", trace)
    body = metrics.as_dict()
    body.update(executor=executor, horizon_ms=fmt_ms(horizon), total_dropped=metrics.total_dropped,
                total_deadline_misses=metrics.total_misses)
    (out / f"{stem}-metrics.json").write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")
    return f"{stem}: jobs={len(trace.jobs)} dropped={metrics.total_dropped} " \
           f"misses={metrics.total_misses}"


def cmd_simulate(args) -> int:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    shared = dict(delta=args.delta, horizon=args.horizon, hyperperiods=args.hyperperiods,
                  policy=args.policy, seed=args.seed, wcet_min_fraction=args.wcet_min_fraction,
                  output=str(out))
    jobs = [(p, e, shared) for p in args.taskset for e in args.executor]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            lines = list(pool.map(_simulate_one, jobs))
    else:
        lines = [_simulate_one(j) for j in jobs]
    for line in lines:
        print(line)
    return EXIT_OK


# -- compare ----------------------------------------------------------------

def chain_latencies(ts, chains, source: str, *, delta=None, horizon=None, seed=0):
    """Per-chain latency (ns or None) from an executor name or 'bound-<policy>-<option>'."""
    if source.startswith("bound-"):
        _, policy, option = source.split("-")
        policy = PriorityPolicy(policy)
        view, pol = ts, policy
        if ts.subscriptions:
            view = periodic_view(ts, PriorityPolicy.RM if policy is PriorityPolicy.EDF else policy)
            pol = PriorityPolicy.EDF if policy is PriorityPolicy.EDF else PriorityPolicy.FIXED
        try:
            report = analyze(view, pol, option, delta, chains)
        except AnalysisError:
            return {c.id: None for c in chains}
        return dict(report.chains)
    d = ts.delta if delta is None else delta
    trace = _run_sim(ts, source, "rm", d, horizon, seed, None)
    out = {}
    for c in chains:
        try:
            out[c.id] = measure_latency(trace, c)
        except LatencyError:
            out[c.id] = None
    return out


def reduction(a, b):
    if a is None or b is None or a == 0:
        return None
    return (a - b) / a


def _check_source(text: str) -> str:
    if text in EXECUTORS or text == "reference":
        return text
    m = re.fullmatch(r"bound-(rm|fp|edf)-(ro|re)", text)
    if m:
        return text
    raise argparse.ArgumentTypeError(
        f"unknown source {text!r}; use an executor name or bound-<rm|fp|edf>-<ro|re>")


def cmd_compare(args) -> int:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for path in args.taskset:
        ts, chains = load_taskset(path)
        if not chains:
            print(f"warning: {path} has no chains", file=sys.stderr)
            continue
        horizon = _horizon(ts, args)
        lat_a = chain_latencies(ts, chains, args.a, delta=args.delta, horizon=horizon, seed=args.seed)
        lat_b = chain_latencies(ts, chains, args.b, delta=args.delta, horizon=horizon, seed=args.seed)
        for c in chains:
            a, b = lat_a[c.id], lat_b[c.id]
            rows.append((Path(path).stem, c.id, a, b, reduction(a, b)))
    with open(out / "reduction.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("taskset", "chain_id", f"{args.a}_ms", f"{args.b}_ms", "reduction"))
        for name, cid, a, b, r in rows:
            w.writerow((name, cid, "" if a is None else fmt_ms(a), "" if b is None else fmt_ms(b),
                        "" if r is None else f"{r:.6f}"))
    vals = np.array([r[4] for r in rows if r[4] is not None], float)
    edges = np.linspace(-1.0, 1.0, args.bins + 1)
    counts, _ = np.histogram(np.clip(vals, -1.0, 1.0), edges)
    with open(out / "histogram.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("bin_lo", "bin_hi", "count"))
        for lo, hi, n in zip(edges[:-1], edges[1:], counts.tolist()):
            w.writerow((f"{lo:.4f}", f"{hi:.4f}", n))
    missing = len(rows) - len(vals)
    if len(vals):
        print(f"chains={len(rows)} missing={missing} median={np.median(vals):.4f} "
              f"positive={int((vals > 0).sum())} negative={int((vals < 0).sum())}")
    else:
        print(f"chains={len(rows)} missing={missing}")
    return EXIT_OK


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="npexec", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    seed = _default_seed()

    g = sub.add_parser("generate", help="write a synthetic or case-study task-set file")
    g.add_argument("-o", "--output", required=True)
    g.add_argument("--casestudy", type=int, choices=(60, 80, 90))
    g.add_argument("--utilization", type=float, default=0.6)
    g.add_argument("--tasks", type=int_range, default=(10, 200), help="N or LO:HI")
    g.add_argument("--chains", type=int_range, default=(5, 60))
    g.add_argument("--chain-length", type=int_range, default=(2, 15))
    g.add_argument("--periods", type=period_weights, help="P:W,P:W,... in ms")
    g.add_argument("--sequences", action="store_true",
                   help="turn some timers into heads of subscription sequences")
    g.add_argument("--delta", type=duration, help="per-release overhead stored in the file")
    g.add_argument("--seed", type=int, default=seed)
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser("analyze", help="overhead, response-time and latency bounds")
    a.add_argument("taskset")
    a.add_argument("--policy", choices=("rm", "fp", "edf"), default="rm")
    a.add_argument("--option", choices=("ro", "re"), default="ro")
    a.add_argument("--delta", type=duration, help="defaults to the file's delta_ms")
    a.add_argument("-o", "--output", default=".")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", help="run executor simulations, write traces and metrics")
    s.add_argument("taskset", nargs="+")
    s.add_argument("--executor", action="append", choices=sorted(EXECUTORS) + ["reference"],
                   required=True, help="repeatable")
    s.add_argument("--policy", choices=("rm", "fp", "edf"), help="for --executor reference")
    s.add_argument("--delta", type=duration)
    horizon = s.add_mutually_exclusive_group()
    horizon.add_argument("--hyperperiods", type=int, default=2)
    horizon.add_argument("--horizon", type=duration)
    s.add_argument("--seed", type=int, default=seed)
    s.add_argument("--wcet-min-fraction", type=float)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("-o", "--output", default=".")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("compare", help="per-chain normalised latency reduction (a - b) / a")
    c.add_argument("taskset", nargs="+")
    c.add_argument("-a", type=_check_source, default="default")
    c.add_argument("-b", type=_check_source, default="rm-ro")
    c.add_argument("--delta", type=duration)
    horizon = c.add_mutually_exclusive_group()
    horizon.add_argument("--hyperperiods", type=int, default=2)
    horizon.add_argument("--horizon", type=duration)
    c.add_argument("--seed", type=int, default=seed)
    c.add_argument("--bins", type=int, default=20)
    c.add_argument("-o", "--output", default=".")
    c.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ModelError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
