import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from roughhurst.errors import ConfigError, RateFitError
from roughhurst.experiments import (
    BoxStats,
    McConfig,
    McRow,
    box_stats,
    rate_fit,
    rate_fit_from_rmse,
    read_estimates_csv,
    run_mc,
    simulate_observation,
    write_estimates_csv,
)

SMALL = McConfig(
    model="dfbm",
    x0=0.0,
    transform="identity",
    hurst_list=(0.3, 0.6),
    n_levels=(6, 7, 8),
    paths=4,
    oversample_q=2,
)


def ols_slope(x, y):
    x, y = np.asarray(x, float), np.asarray(y, float)
    xm, ym = x.mean(), y.mean()
    return ((x - xm) * (y - ym)).sum() / ((x - xm) ** 2).sum()


@pytest.fixture(scope="module")
def small_result():
    return run_mc(SMALL, threads=1)


class TestConfig:
    def test_defaults(self):
        c = McConfig()
        assert (c.model, c.x0, c.rho, c.mu, c.transform) == ("fou", 2.0, 0.2, 2.0, "exp2t")
        assert c.n_levels == (10, 11, 12, 13, 14)
        assert c.obs_level == 16 and c.sim_level == 20

    def test_round_trip(self):
        d = json.loads(json.dumps(SMALL.to_dict()))
        assert McConfig.from_dict(d) == SMALL

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="bogus"):
            McConfig.from_dict({"bogus": 1})

    @pytest.mark.parametrize(
        "changes",
        [
            {"paths": 0},
            {"model": "heston"},
            {"transform": "cube"},
            {"hurst_list": (1.0,)},
            {"hurst_list": ()},
            {"n_levels": (4, 5)},
            {"n_levels": (21,)},
            {"oversample_q": -1},
            {"seed0": -3},
            {"backend": "fft"},
            {"alphas": (1.0, 1.0)},
        ],
    )
    def test_invalid(self, changes):
        with pytest.raises((ConfigError, ValueError)):
            SMALL.replace(**changes)

    def test_smooth_fou_flagged(self):
        c = McConfig(hurst_list=(0.1, 0.7))
        w = c.model_warnings()
        assert len(w) == 1 and "H=0.7" in w[0]
        assert not SMALL.replace(hurst_list=(0.7,)).model_warnings()  # drifted fBm is fine


class TestRunMc:
    def test_shape_and_order(self, small_result):
        rows = small_result.rows
        assert len(rows) == 2 * 4 * 3
        keys = [(r.hurst, r.path, r.n) for r in rows]
        assert keys == sorted(keys)
        assert all(r.seed == SMALL.seed0 + r.path for r in rows)

    def test_accounting(self, small_result):
        c = small_result.counts
        assert c["simulated"] == c["ok"] + c["degenerate"] + c["sim_failed"]
        assert c["ok"] == len(small_result.rows)

    def test_deterministic(self, small_result):
        again = run_mc(SMALL, threads=1)
        assert again.rows == small_result.rows

    def test_threads_match_serial(self, small_result):
        assert run_mc(SMALL, threads=2).rows == small_result.rows

    def test_common_seeds_across_h(self, small_result):
        # path p of every H is driven by the same seed
        by_h = {h: [r.seed for r in small_result.rows if r.hurst == h] for h in SMALL.hurst_list}
        assert by_h[0.3] == by_h[0.6]

    def test_paired_design(self, small_result):
        # estimates at a coarser n use a restriction of the same simulated path
        from roughhurst.estimator import r_seq

        ip = simulate_observation(SMALL, 0.3, SMALL.seed0 + 2)
        for n in SMALL.n_levels:
            row = next(r for r in small_result.rows if r.hurst == 0.3 and r.path == 2 and r.n == n)
            assert row.r_seq == r_seq(ip.y, n, SMALL.estimator).r_seq

    def test_seed0_shifts_paths(self, small_result):
        shifted = run_mc(SMALL.replace(seed0=1, paths=3, hurst_list=(0.3,)), threads=1)
        old = {(r.path, r.n): r.r_seq for r in small_result.rows if r.hurst == 0.3}
        for r in shifted.rows:
            assert r.r_seq == old[(r.path + 1, r.n)]

    def test_degenerate_recorded(self):
        # a constant transform yields Y linear in t: every level is degenerate, nothing is fatal
        from roughhurst import experiments
        from roughhurst.processes import Transform

        orig = Transform.by_name
        try:
            Transform.by_name = classmethod(lambda cls, name: Transform.polynomial([1.0]))
            res = experiments.run_mc(SMALL.replace(paths=2, hurst_list=(0.3,)), threads=1)
        finally:
            Transform.by_name = orig
        assert res.counts["degenerate"] == 6 and res.counts["ok"] == 0
        assert res.counts["simulated"] == 6
        assert any("positivity" in s for s in res.notes)
        assert box_stats(res.rows) == []

    def test_csv_round_trip(self, small_result, tmp_path):
        f = tmp_path / "est.csv"
        write_estimates_csv(small_result.rows, f)
        assert read_estimates_csv(f) == small_result.rows
        assert f.read_text().splitlines()[0] == ",".join(McRow.FIELDS)


class TestBoxStats:
    def test_single_value(self):
        b = BoxStats.from_values([0.25], 0.3, 10)
        assert b.median == b.q1 == b.q3 == b.whisker_lo == b.whisker_hi == 0.25
        assert b.outliers == () and b.count == 1
        assert b.rmse_vs_H == pytest.approx(0.05)

    def test_one_to_five(self):
        b = BoxStats.from_values([5, 3, 1, 4, 2], 3.0, 10)
        assert (b.median, b.q1, b.q3) == (3.0, 2.0, 4.0)
        assert (b.whisker_lo, b.whisker_hi) == (1.0, 5.0)
        assert b.rmse_vs_H == pytest.approx(math.sqrt(2.0))

    def test_outliers(self):
        b = BoxStats.from_values([1, 2, 3, 4, 5, 100], 0.0, 3)
        assert b.outliers == (100.0,)
        assert b.whisker_hi == 5.0

    @given(st.lists(st.floats(-10, 10), min_size=1, max_size=60))
    @settings(max_examples=100, deadline=None)
    def test_invariants(self, vals):
        b = BoxStats.from_values(vals, 0.1, 5)
        assert b.q1 <= b.median <= b.q3
        # whiskers are data points, so an interpolated quartile may lie beyond them
        assert b.whisker_lo <= b.whisker_hi
        inside = [v for v in vals if b.whisker_lo <= v <= b.whisker_hi]
        assert len(inside) + len(b.outliers) == len(vals)
        assert b.rmse_vs_H >= 0
        assert b.count == len(vals)

    def test_grouping(self, small_result):
        stats = box_stats(small_result.rows)
        assert [(s.hurst, s.n) for s in stats] == [(h, n) for h in (0.3, 0.6) for n in (6, 7, 8)]
        s = stats[0]
        vals = small_result.values(0.3, 6)
        assert s.median == np.median(vals) and s.count == 4

    def test_empty_group_skipped(self, caplog):
        rows = [McRow(0.3, 6, 0, 0, "ok", 0.1, 0.2, 0.0), McRow(0.3, 7, 0, 0, "degenerate")]
        stats = box_stats(rows)
        assert len(stats) == 1 and stats[0].n == 6
        assert "skipped" in caplog.text


class TestRateFit:
    def test_exact_half(self):
        levels = list(range(8, 15))
        fit = rate_fit_from_rmse(levels, [2.0 ** (-n / 2) for n in levels])
        assert fit.slope == pytest.approx(-0.5, abs=1e-12)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
        assert fit.intercept == pytest.approx(0.0, abs=1e-10)

    def test_sqrt_n_contamination(self):
        # log2 rmse = log2 c - n/4 + log2(n)/2; the sqrt(n) factor biases the slope upward
        levels = list(range(8, 15))
        c = 0.7
        rmse = [c * 2 ** (-n / 4) * math.sqrt(n) for n in levels]
        fit = rate_fit_from_rmse(levels, rmse)
        drift = ols_slope(levels, [0.5 * math.log2(n) for n in levels])
        assert fit.slope == pytest.approx(-0.25 + drift, abs=1e-12)
        assert abs(fit.slope - (-0.25 + drift)) <= 0.05
        assert 0.05 < drift < 0.1

    def test_constant_rejected(self):
        with pytest.raises(RateFitError):
            rate_fit_from_rmse([8, 9, 10], [0.1, 0.1, 0.1])

    @pytest.mark.parametrize(
        "levels,rmse",
        [([8, 9], [0.1, 0.05]), ([8, 9, 10], [0.1, 0.0, 0.01]), ([8, 8, 9], [0.1, 0.2, 0.3]), ([8, 9, 10], [1, math.nan, 2])],
    )
    def test_bad_input(self, levels, rmse):
        with pytest.raises(RateFitError):
            rate_fit_from_rmse(levels, rmse)

    def test_from_box_stats(self, small_result):
        stats = [s for s in box_stats(small_result.rows) if s.hurst == 0.3]
        fit = rate_fit(stats)
        assert fit.levels == (6, 7, 8)
        assert fit.slope == pytest.approx(ols_slope([6, 7, 8], [math.log2(s.rmse_vs_H) for s in stats]))

    def test_mixed_h_rejected(self, small_result):
        with pytest.raises(RateFitError):
            rate_fit(box_stats(small_result.rows))
