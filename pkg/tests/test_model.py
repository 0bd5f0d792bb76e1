import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import timer_sets
from npexec.io import dump_taskset, load_taskset, taskset_from_dict, taskset_to_dict
from npexec.model import (Chain, ChainMode, ModelError, PriorityPolicy, TaskSet, TaskSpec,
                          assign_priorities, effective_ranks, fmt_ms, hyperperiod, ms)


def timers(*specs):
    return TaskSet(tuple(TaskSpec.timer(i, c, t, priority=i) for i, (c, t) in enumerate(specs)))


class TestUnits:
    def test_ms_is_exact(self):
        assert ms("0.12") == 120_000
        assert ms(0.12) == 120_000
        assert ms(Fraction(1, 3)) == 333_333
        assert ms(84) == 84_000_000

    @pytest.mark.parametrize("ns,text", [(12_680_000, "12.68"), (30_000_000, "30"),
                                         (1, "0.000001"), (-500_000, "-0.5")])
    def test_fmt_ms(self, ns, text):
        assert fmt_ms(ns) == text


class TestHyperperiod:
    def test_casestudy_periods(self):
        assert hyperperiod(timers((1, 84), (1, 200), (1, 30))) == ms(4200)

    def test_single(self):
        assert hyperperiod(timers((1, 10))) == ms(10)

    def test_lcm(self):
        assert hyperperiod(timers((1, 4), (1, 6))) == ms(12)

    def test_empty(self):
        subs_only = TaskSet((TaskSpec.subscription(0, 1, topic=3),))
        with pytest.raises(ModelError, match="empty hyperperiod"):
            hyperperiod(subs_only)

    @given(timer_sets())
    def test_divisible_by_every_period(self, ts):
        h = hyperperiod(ts)
        assert all(h % t.period == 0 for t in ts)


class TestPriorities:
    def test_rm_casestudy_order(self):
        ts = TaskSet((TaskSpec.timer(0, 1, 30, priority=5),
                      TaskSpec.timer(1, 10, 84, priority=3),
                      TaskSpec.timer(2, 10, 200, priority=1)))
        out = assign_priorities(ts, PriorityPolicy.RM)
        p = {t.id: t.priority for t in out}
        assert p[0] < p[1] < p[2]

    def test_single_task(self):
        out = assign_priorities(timers((1, 10)), PriorityPolicy.RM)
        assert out.tasks[0].priority == 0

    def test_equal_periods_tie_by_id(self):
        ts = TaskSet((TaskSpec.timer(7, 1, 10, priority=0), TaskSpec.timer(3, 1, 10, priority=1)))
        p = {t.id: t.priority for t in assign_priorities(ts, PriorityPolicy.RM)}
        assert p[3] < p[7]

    @pytest.mark.parametrize("policy", [PriorityPolicy.FIFO, PriorityPolicy.EDF])
    def test_no_static_assignment(self, policy):
        with pytest.raises(ModelError):
            assign_priorities(timers((1, 10)), policy)

    @given(timer_sets(), st.sampled_from([PriorityPolicy.RM, PriorityPolicy.FIXED]))
    def test_idempotent_total_order(self, ts, policy):
        once = assign_priorities(ts, policy)
        assert assign_priorities(once, policy) == once
        assert sorted(t.priority for t in once) == list(range(len(ts)))

    def test_subscription_inherits_publisher_rank(self):
        ts = TaskSet((TaskSpec.timer(0, 1, 10, priority=0, publishes_to=1),
                      TaskSpec.timer(1, 1, 5, priority=1),
                      TaskSpec.timer(2, 1, 20, priority=2),
                      TaskSpec.subscription(3, 1, topic=1, priority=3)))
        r = effective_ranks(ts, PriorityPolicy.RM)
        assert r[1] < r[0] < r[3] < r[2]


class TestValidation:
    def test_deadline_above_period_rejected(self):
        with pytest.raises(ModelError, match="constrained"):
            TaskSet((TaskSpec.timer(0, 1, 10, deadline_ms=12),))

    def test_duplicate_priorities_rejected(self):
        with pytest.raises(ModelError, match="priorit"):
            TaskSet((TaskSpec.timer(0, 1, 10, priority=0), TaskSpec.timer(1, 1, 10, priority=0)))

    def test_duplicate_ids_rejected(self):
        with pytest.raises(ModelError, match="ids"):
            TaskSet((TaskSpec.timer(0, 1, 10, priority=0), TaskSpec.timer(0, 1, 10, priority=1)))

    def test_negative_delta_rejected(self):
        with pytest.raises(ModelError):
            TaskSet((TaskSpec.timer(0, 1, 10),), delta=-1)

    def test_cycle_rejected(self):
        with pytest.raises(ModelError, match="cycle"):
            TaskSet((TaskSpec.timer(0, 1, 10, priority=0, publishes_to=1),
                     TaskSpec.subscription(1, 1, topic=1, priority=1, publishes_to=2),
                     TaskSpec.subscription(2, 1, topic=2, priority=2, publishes_to=2)))

    def test_sequence_chain_checks_activation(self):
        ts = TaskSet((TaskSpec.timer(0, 1, 10, priority=0, publishes_to=1),
                      TaskSpec.subscription(1, 1, topic=1, priority=1),
                      TaskSpec.timer(2, 1, 10, priority=2)))
        Chain(0, (0, 1), ChainMode.SEQUENCE).validate(ts)
        with pytest.raises(ModelError):
            Chain(1, (2, 1), ChainMode.SEQUENCE).validate(ts)
        with pytest.raises(ModelError):
            Chain(2, (0, 1), ChainMode.SAMPLED).validate(ts)

    def test_two_activators_rejected_for_sequence(self):
        ts = TaskSet((TaskSpec.timer(0, 1, 10, priority=0, publishes_to=1),
                      TaskSpec.timer(2, 1, 10, priority=2, publishes_to=1),
                      TaskSpec.subscription(1, 1, topic=1, priority=1)))
        with pytest.raises(ModelError, match="exactly one"):
            Chain(0, (0, 1), ChainMode.SEQUENCE).validate(ts)


class TestFiles:
    def test_defaults(self):
        ts, chains = taskset_from_dict({"delta_ms": "0.12", "tasks": [
            {"id": 4, "kind": "timer", "wcet_ms": 1, "period_ms": 30}]})
        t = ts.tasks[0]
        assert t.deadline == ms(30) and t.phase == 0 and t.priority == 4
        assert ts.delta == ms("0.12") and chains == []

    @given(timer_sets())
    def test_round_trip(self, ts):
        chains = [Chain(0, tuple(t.id for t in ts))]
        back, back_chains = taskset_from_dict(json.loads(json.dumps(taskset_to_dict(ts, chains))))
        assert back == ts and back_chains == chains

    def test_dump_load(self, tmp_path):
        ts = TaskSet((TaskSpec.timer(0, 1, 10, priority=0, publishes_to=9),
                      TaskSpec.subscription(1, 2, topic=9, priority=1)), delta=ms("0.1"), name="x")
        chains = [Chain(3, (0, 1), ChainMode.SEQUENCE)]
        dump_taskset(tmp_path / "a.json", ts, chains)
        assert load_taskset(tmp_path / "a.json") == (ts, chains)

    def test_malformed(self):
        with pytest.raises(ModelError, match="malformed"):
            taskset_from_dict({"tasks": [{"id": 0}]})
