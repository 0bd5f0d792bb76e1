import os

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from npexec.model import TaskKind, TaskSet, TaskSpec

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=300,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

MS = 1_000_000
# periods with small lcm so every hypothesis case simulates quickly
SMALL_PERIODS = (2, 3, 4, 5, 6, 8, 10, 12)

# criterion lines collected by the acceptance suite, printed after the run
ACCEPTANCE_LINES: list[str] = []


@st.composite
def timer_sets(draw, min_n=1, max_n=5, max_util=1.0, implicit=True):
    n = draw(st.integers(min_n, max_n))
    periods = draw(st.lists(st.sampled_from(SMALL_PERIODS), min_size=n, max_size=n))
    tasks = []
    for i, p in enumerate(periods):
        # wcets on a 50 us grid keep ties (and therefore tie-breaks) frequent
        c = draw(st.integers(1, int(p * MS * max_util / n) // 50_000 or 1)) * 50_000
        d = p * MS if implicit else draw(st.integers(max(c, 1), p * MS))
        tasks.append(TaskSpec(id=i, kind=TaskKind.TIMER, wcet=c, period=p * MS, deadline=d,
                              priority=i))
    return TaskSet(tuple(tasks))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
