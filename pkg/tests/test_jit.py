"""Compiled kernels and their plain-Python fallbacks must produce identical output."""
import json
import os
import subprocess
import sys

from npexec._jit import JIT_ENABLED

SCRIPT = r"""
import hashlib, json, sys
import numpy as np
from npexec.gen import GenParams, casestudy, generate_sequences, generate_taskset
from npexec.sim import executor_config, simulate
from npexec.analysis import analyze
from npexec._jit import JIT_ENABLED
out = {"jit": JIT_ENABLED, "sims": [], "bounds": []}
for ts in cases():
    for name in NAMES:
        tr = simulate(ts, executor_config(name, ts.delta, wcet_min_fraction=0.4), seed=1)
        out["sims"].append(hashlib.sha256(tr.jobs.tobytes() + repr(tr.drops).encode()).hexdigest())
    if not ts.subscriptions:
        for pol in ("rm", "edf"):
            try:
                out["bounds"].append(repr(sorted(analyze(ts, pol, "ro").wcrts().items())))
            except Exception as exc:
                out["bounds"].append(type(exc).__name__)
print(json.dumps(out))
"""

CASES = r"""
NAMES = ("default", "events-fifo-ro", "events-fifo-re", "rm-ro", "rm-re", "edf-ro", "edf-re")
def cases():
    yield casestudy(90)
    rng = np.random.default_rng(3)
    p = GenParams(utilization=0.85, tasks=(3, 8), periods={10: 1, 20: 1, 50: 1})
    for _ in range(4):
        yield generate_taskset(p, rng)
    for _ in range(3):
        yield generate_sequences(p, rng)[0]
"""


def _run(no_jit: bool) -> dict:
    env = dict(os.environ)
    env.pop("NPEXEC_NO_JIT", None)
    if no_jit:
        env["NPEXEC_NO_JIT"] = "1"
    src = SCRIPT.replace("out = {", CASES + "\nout = {", 1)
    res = subprocess.run([sys.executable, "-c", src], env=env, capture_output=True, text=True,
                         check=True, timeout=600)
    return json.loads(res.stdout)


def test_fallback_matches_compiled():
    fast, slow = _run(False), _run(True)
    assert slow["jit"] is False
    assert fast["jit"] is JIT_ENABLED
    assert fast["sims"] == slow["sims"]
    assert fast["bounds"] == slow["bounds"]
