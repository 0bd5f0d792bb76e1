"""Compare compiled kernels against the pure-Python/numpy fallback.

Each mode runs in its own interpreter because the switch is read at import
time. Usage: ``python3 benchmarks/bench_kernels.py [--sets N] [--repeat R]``.
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, sys, time
from dataclasses import replace
import numpy as np
from npexec._jit import JIT_ENABLED
from npexec.analysis import analyze
from npexec.gen import GenParams, casestudy, generate_taskset
from npexec.model import hyperperiod, ms
from npexec.sim import executor_config, simulate

n_sets, repeat = int(sys.argv[1]), int(sys.argv[2])
rng = np.random.default_rng(0)
p = GenParams(utilization=0.8, tasks=(5, 20), periods={10: 1, 20: 1, 50: 1, 100: 1, 200: 1})
sets = [replace(generate_taskset(p, rng), delta=ms("0.12")) for _ in range(n_sets)]
cs = casestudy(90)

def sim_all():
    for name in ("default", "rm-ro", "edf-re"):
        simulate(cs, executor_config(name, cs.delta), 10 * hyperperiod(cs))
        for ts in sets:
            simulate(ts, executor_config(name, ts.delta))

def analyze_all():
    for ts in sets:
        for policy in ("rm", "edf"):
            analyze(ts, policy, "re", ts.delta)

def best(fn):
    t = []
    for _ in range(repeat):
        t0 = time.perf_counter(); fn(); t.append(time.perf_counter() - t0)
    return min(t)

t0 = time.perf_counter(); sim_all(); analyze_all(); first = time.perf_counter() - t0
print(json.dumps({"jit": JIT_ENABLED, "first_call": first,
                  "simulate": best(sim_all), "analyze": best(analyze_all)}))
"""


def run(no_jit: bool, sets: int, repeat: int) -> dict:
    env = dict(os.environ)
    env.pop("NPEXEC_NO_JIT", None)
    if no_jit:
        env["NPEXEC_NO_JIT"] = "1"
    out = subprocess.run([sys.executable, "-c", WORKLOAD, str(sets), str(repeat)],
                         env=env, check=True, capture_output=True, text=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sets", type=int, default=50)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    jit = run(False, args.sets, args.repeat)
    py = run(True, args.sets, args.repeat)
    print(f"{'':10}{'numba':>10}{'fallback':>10}{'speedup':>9}")
    for key in ("simulate", "analyze", "first_call"):
        print(f"{key:10}{jit[key]:10.3f}{py[key]:10.3f}{py[key] / jit[key]:8.1f}x")
    if not jit["jit"]:
        print("note: numba unavailable, both columns ran the fallback")


if __name__ == "__main__":
    main()
