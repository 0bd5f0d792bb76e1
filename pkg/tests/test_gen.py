import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from npexec.gen import (GenParams, casestudy, generate_chains, generate_sequences,
                        generate_taskset, uunifast_discard)
from npexec.model import ChainMode, ModelError, hyperperiod, ms

AUTOMOTIVE = {ms(p) for p in (1, 2, 5, 10, 20, 50, 100, 200, 1000)}


def exact_util(ts):
    return sum(Fraction(t.wcet, t.period) for t in ts)


class TestUUniFast:
    def test_single(self):
        assert uunifast_discard(1, 0.6, 0) == [0.6]

    def test_sum(self):
        u = uunifast_discard(7, 0.9, 42)
        assert len(u) == 7 and abs(sum(u) - 0.9) < 1e-9

    @given(st.integers(1, 50), st.floats(0.01, 1.0), st.integers(0, 2**32 - 1))
    def test_properties(self, n, U, seed):
        u = uunifast_discard(n, U, seed)
        assert len(u) == n and abs(sum(u) - U) < 1e-9
        if n > 1:
            assert all(0 < x < 1 for x in u)

    def test_marginal_uniform(self):
        rng = np.random.default_rng(1)
        u1 = np.array([uunifast_discard(2, 0.8, rng)[0] for _ in range(10_000)])
        counts, _ = np.histogram(u1, bins=20, range=(0, 0.8))
        assert stats.chisquare(counts).pvalue > 1e-3

    def test_bad_input(self):
        with pytest.raises(ModelError):
            uunifast_discard(0, 0.5)
        with pytest.raises(ModelError):
            uunifast_discard(3, 1.2)


class TestTaskSets:
    def test_utilisation_window(self):
        ts = generate_taskset(GenParams(utilization=0.6, seed=5))
        u = exact_util(ts)
        assert Fraction(6, 10) - Fraction(1, 10**6) <= u <= Fraction(6, 10)

    def test_deterministic(self):
        p = GenParams(utilization=0.8, seed=11)
        assert generate_taskset(p) == generate_taskset(p)
        assert generate_taskset(p) != generate_taskset(GenParams(utilization=0.8, seed=12))

    def test_periods_in_automotive_set(self):
        rng = np.random.default_rng(0)
        p = GenParams(utilization=0.9, tasks=(10, 40))
        for _ in range(1000):
            ts = generate_taskset(p, rng)
            assert {t.period for t in ts} <= AUTOMOTIVE

    @given(st.floats(0.05, 1.0), st.integers(0, 10**6), st.integers(1, 60))
    def test_valid_and_within_target(self, U, seed, n):
        ts = generate_taskset(GenParams(utilization=U, tasks=(1, n), seed=seed))
        u = exact_util(ts)
        target = Fraction(repr(U))
        assert target - Fraction(1, 10**6) <= u <= target
        assert all(t.wcet > 0 and t.deadline == t.period and t.phase == 0 for t in ts)
        assert sorted(t.priority for t in ts) == list(range(len(ts)))
        rm = sorted(ts, key=lambda t: (t.period, t.id))
        assert [t.priority for t in rm] == list(range(len(ts)))

    def test_period_subset(self):
        ts = generate_taskset(GenParams(tasks=(30, 30), periods={10: 1, 20: 3}, seed=1))
        assert {t.period for t in ts} <= {ms(10), ms(20)}

    def test_bad_params(self):
        with pytest.raises(ModelError):
            GenParams(utilization=1.2)
        with pytest.raises(ModelError):
            GenParams(tasks=(5, 2))


class TestChains:
    def test_fixed_length(self):
        p = GenParams(chain_length=(2, 2), seed=3)
        ts = generate_taskset(p)
        chains = generate_chains(ts, p)
        assert chains and all(len(c.task_ids) == 2 and c.mode is ChainMode.SAMPLED for c in chains)
        for c in chains:
            assert len(set(c.task_ids)) == len(c.task_ids)
            c.validate(ts)

    def test_deterministic(self):
        p = GenParams(seed=9)
        ts = generate_taskset(p)
        assert generate_chains(ts, p) == generate_chains(ts, p)

    def test_length_distribution(self):
        rng = np.random.default_rng(2)
        p = GenParams(tasks=(20, 20), chains=(1, 1))
        ts = generate_taskset(p, rng)
        lengths = np.array([len(generate_chains(ts, p, rng)[0].task_ids) for _ in range(1000)])
        counts = np.bincount(lengths, minlength=16)[2:16]
        expect = 1000 / 14
        sigma = np.sqrt(1000 * (1 / 14) * (13 / 14))
        assert np.all(np.abs(counts - expect) <= 3 * sigma)

    def test_clamp_warns(self):
        p = GenParams(tasks=(3, 3), chain_length=(2, 10), seed=0)
        ts = generate_taskset(p)
        with pytest.warns(UserWarning, match="clamping"):
            chains = generate_chains(ts, p)
        assert all(len(c.task_ids) <= 3 for c in chains)

    def test_sequences(self):
        ts, chains = generate_sequences(GenParams(utilization=0.5, tasks=(4, 8), seed=4))
        assert chains and all(c.mode is ChainMode.SEQUENCE for c in chains)
        assert exact_util(ts) <= Fraction(1, 2)
        for c in chains:
            c.validate(ts)


class TestCaseStudy:
    def test_sixty(self):
        ts = casestudy(60)
        assert len(ts) == 7 and hyperperiod(ts) == ms(4200)
        assert abs(ts.utilization() - 0.61) < 0.005
        assert ts.delta == ms("0.12")
        assert all(t.phase == 0 and t.deadline == t.period for t in ts)

    @pytest.mark.parametrize("util,c", [(80, 14), (90, 16)])
    def test_camera_wcet(self, util, c):
        ts = casestudy(util)
        assert {t.wcet for t in ts if t.period == ms(84)} == {ms(c)}

    def test_rm_priorities(self):
        ts = casestudy(60)
        order = [t.period for t in sorted(ts, key=lambda t: t.priority)]
        assert order == sorted(order)

    def test_other_util(self):
        with pytest.raises(ModelError):
            casestudy(70)


def test_no_warning_when_lengths_fit():
    p = GenParams(tasks=(20, 20), chain_length=(2, 15), seed=1)
    ts = generate_taskset(p)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        generate_chains(ts, p)
