"""QoE scoring, spreads and run summaries."""

import math

import numpy as np
import pytest

from iovsim.errors import EmptyRunError, MismatchedScenariosError, NoActivePmError
from iovsim.metrics import (MetricsRecord, balance_spread, compare, mos,
                            r_factor, summarize)


class TestRFactor:
    def test_zero_impairment(self):
        assert r_factor(0.0, 0.0) == pytest.approx(93.2)

    def test_delay_only(self):
        assert r_factor(100.0, 0.0) == pytest.approx(90.8)

    def test_high_delay_kicks_second_term(self):
        expected = 93.2 - (0.024 * 200 + 0.11 * (200 - 177.3))
        assert r_factor(200.0, 0.0) == pytest.approx(expected)

    def test_total_loss_floors_the_score(self):
        for delay in (1.0, 10.0, 100.0, 500.0):
            assert r_factor(delay, 1.0) <= 10.0
        assert r_factor(2000.0, 1.0) == 0.0

    def test_monotone_in_delay_and_loss(self):
        delays = np.linspace(0, 400, 25)
        scores = [r_factor(d, 0.02) for d in delays]
        assert all(b <= a + 1e-12 for a, b in zip(scores, scores[1:]))
        losses = np.linspace(0, 1, 25)
        scores = [r_factor(50.0, l) for l in losses]
        assert all(b <= a + 1e-12 for a, b in zip(scores, scores[1:]))


class TestMos:
    def test_clamps(self):
        assert mos(0.0) == 1.0
        assert mos(-5.0) == 1.0
        assert mos(100.0) == 4.5
        assert mos(150.0) == 4.5

    def test_reference_value(self):
        r = 93.2
        expected = 1 + 0.035 * r + 7e-6 * r * (r - 60) * (100 - r)
        assert mos(93.2) == pytest.approx(expected)
        assert mos(93.2) == pytest.approx(4.41, abs=5e-3)

    def test_monotone_on_score_range(self):
        scores = [mos(r) for r in np.linspace(0, 100, 101)]
        assert all(b >= a - 1e-12 for a, b in zip(scores, scores[1:]))


class TestBalanceSpread:
    def test_reference_traditional_row(self):
        row = [70.8, 19.8, 25.7, 41.7, 51.5, 60.3, 35.2, 50.7]
        assert balance_spread(row) == pytest.approx(51.0)

    def test_reference_proposed_row(self):
        row = [40.5, 40.8, 40.0, 41.7, 42.6, 41.0, 40.6, 40.8]
        assert balance_spread(row) == pytest.approx(2.6)

    def test_all_equal_is_zero(self):
        assert balance_spread([0.4, 0.4, 0.4]) == 0.0

    def test_shift_invariance(self):
        rng = np.random.Generator(np.random.PCG64(1))
        base = rng.uniform(0.1, 0.6, 8)
        assert balance_spread(base + 0.2) == pytest.approx(balance_spread(base))

    def test_empty_raises(self):
        with pytest.raises(NoActivePmError):
            balance_spread([])


def record(tick, utils, powers, delay=10.0, jitter=1.0, setup=1010.0,
           offered=100, served=50, rejected=0, lost=0):
    return MetricsRecord(
        tick=tick, pm_utilization=tuple(utils), pm_power_w=tuple(powers),
        pm_connections=(1, 1, 1), switch_utilization=(0.2, 0.3),
        offered=offered, served=served, rejected=rejected, lost=lost,
        mean_delay_ms=delay, mean_jitter_ms=jitter, mean_setup_ms=setup,
        system_temperature=0.5, on_pm_count=3, vnf_count=4)


class TestSummarize:
    def test_single_record_summary(self):
        rec = record(0, (0.4, 0.5, 0.6), (160.0, 175.0, 190.0))
        s = summarize([rec], name="x", mode="proposed", seed=7, dt=1.0)
        assert s.mean_pm_utilization == pytest.approx((0.4, 0.5, 0.6))
        assert s.total_energy_kwh == pytest.approx(525.0 / 3.6e6)
        assert s.goodput == 1.0
        assert s.mean_pm_spread_pp == pytest.approx(20.0)

    def test_two_records_hand_summed(self):
        r1 = record(0, (0.2, 0.2, 0.2), (130.0, 130.0, 130.0), delay=10.0)
        r2 = record(1, (0.4, 0.4, 0.4), (160.0, 160.0, 160.0), delay=20.0,
                    lost=10)
        s = summarize([r1, r2], dt=1.0)
        assert s.mean_utilization == pytest.approx(0.3)
        assert s.total_energy_kwh == pytest.approx((390.0 + 480.0) / 3.6e6)
        r_first = r_factor(10.0, 0.0)
        r_second = r_factor(20.0, 0.1)
        assert s.mean_r_factor == pytest.approx((r_first + r_second) / 2)
        assert s.mean_mos == pytest.approx((mos(r_first) + mos(r_second)) / 2)
        assert s.loss_rate == pytest.approx(0.1)
        assert s.goodput == pytest.approx(0.9)

    def test_off_pm_excluded_from_spread(self):
        rec = record(0, (0.5, 0.6, 0.0), (175.0, 190.0, 0.0))
        s = summarize([rec])
        assert s.mean_pm_spread_pp == pytest.approx(10.0)

    def test_empty_raises(self):
        with pytest.raises(EmptyRunError):
            summarize([])

    def test_roundtrip_dict(self):
        rec = record(0, (0.4, 0.5, 0.6), (160.0, 175.0, 190.0))
        s = summarize([rec], name="x", mode="proposed", seed=7)
        assert type(s).from_dict(s.to_dict()) == s


class TestCompare:
    def make_summary(self, mode, energy, name="s", seed=1):
        rec = record(0, (0.4, 0.4, 0.4), (energy, 0.0, 0.0))
        s = summarize([rec], name=name, mode=mode, seed=seed)
        return s

    def test_identical_summaries_zero_deltas(self):
        a = self.make_summary("proposed", 100.0)
        b = self.make_summary("traditional", 100.0)
        rep = compare(a, b)
        assert rep.energy_reduction_pct == 0.0
        assert rep.mos_delta == 0.0
        assert rep.goodput_delta == 0.0

    def test_thirty_percent_reduction(self):
        a = self.make_summary("proposed", 70.0)
        b = self.make_summary("traditional", 100.0)
        assert compare(a, b).energy_reduction_pct == pytest.approx(30.0)

    def test_mismatched_seed_raises(self):
        a = self.make_summary("proposed", 70.0, seed=1)
        b = self.make_summary("traditional", 100.0)
        b.seed = 2
        with pytest.raises(MismatchedScenariosError):
            compare(a, b)

    def test_mismatched_name_raises(self):
        a = self.make_summary("proposed", 70.0, name="a")
        b = self.make_summary("traditional", 100.0, name="b")
        with pytest.raises(MismatchedScenariosError):
            compare(a, b)
