"""Performance statistics and quantile diagnostics.

Expected values were worked out by hand (or by explicit loops inside
the test) before being frozen; no test trusts the library to grade
itself.
"""
import json

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lsquant.analytics import (
    aggregate_returns,
    assign_quantiles,
    beta_decomposition,
    build_tearsheet,
    max_drawdown,
    quantile_report,
    sharpe,
    write_quantile_report,
    write_tearsheet,
)

SQRT252 = np.sqrt(252.0)


def bdays(start, n):
    return pd.date_range(start, periods=n, freq="B")


class TestSharpe:
    def test_alternating_mean_zero(self):
        r = pd.Series([0.01, -0.01] * 10)
        assert sharpe(r) == 0.0

    def test_hand_value(self):
        # mean 0.02, sample std 0.01: ratio 2 annualized by sqrt(252)
        r = pd.Series([0.01, 0.02, 0.03])
        assert sharpe(r) == pytest.approx(2.0 * SQRT252, rel=1e-12)

    def test_periods_per_year(self):
        r = pd.Series([0.01, 0.02, 0.03])
        assert sharpe(r, periods_per_year=52) == pytest.approx(
            2.0 * np.sqrt(52.0), rel=1e-12
        )

    def test_risk_free_shift(self):
        r = pd.Series([0.01, 0.02, 0.03])
        assert sharpe(r, rf=0.02) == pytest.approx(0.0, abs=1e-12)

    def test_constant_returns_undefined(self):
        # exactly-representable constant so the sample std is exactly 0
        assert sharpe(pd.Series([0.015625] * 30)) is None
        assert sharpe(pd.Series([0.0] * 10)) is None

    def test_too_short(self):
        with pytest.raises(ValueError, match="at least 2"):
            sharpe(pd.Series([0.01]))

    def test_nan_dropped(self):
        r = pd.Series([0.01, np.nan, 0.02, 0.03])
        assert sharpe(r) == pytest.approx(2.0 * SQRT252, rel=1e-12)

    @given(scale=st.floats(min_value=0.01, max_value=100.0))
    @settings(max_examples=40, deadline=None)
    def test_scale_invariance(self, scale):
        rng = np.random.default_rng(17)
        r = pd.Series(rng.normal(5e-4, 0.01, 120))
        assert sharpe(r * scale) == pytest.approx(sharpe(r), rel=1e-9)


class TestMaxDrawdown:
    def test_hand_value(self):
        # trough 90 below the running peak 120
        eq = pd.Series([100.0, 120.0, 90.0, 130.0])
        assert max_drawdown(eq) == pytest.approx(-0.25, rel=1e-12)

    def test_monotone_is_zero(self):
        assert max_drawdown(pd.Series([1.0, 2.0, 3.0, 4.0])) == 0.0

    def test_flat_is_zero(self):
        assert max_drawdown(pd.Series([5.0] * 8)) == 0.0

    def test_worst_point_not_last(self):
        eq = pd.Series([100.0, 50.0, 150.0, 120.0])
        assert max_drawdown(eq) == pytest.approx(-0.5)

    def test_empty(self):
        with pytest.raises(ValueError, match="empty"):
            max_drawdown(pd.Series(dtype=float))

    def test_nonpositive_equity(self):
        with pytest.raises(ValueError, match="positive"):
            max_drawdown(pd.Series([100.0, -5.0]))

    @given(seed=st.integers(0, 1000))
    @settings(max_examples=40, deadline=None)
    def test_bounded_in_unit_interval(self, seed):
        rng = np.random.default_rng(seed)
        eq = pd.Series(100.0 * np.cumprod(1.0 + rng.normal(0, 0.02, 60)))
        mdd = max_drawdown(eq)
        assert -1.0 < mdd <= 0.0


class TestBetaDecomposition:
    def test_exact_half_beta(self):
        idx = bdays("2021-01-04", 40)
        rng = np.random.default_rng(2)
        b = pd.Series(rng.normal(0, 0.01, 40), index=idx)
        r = 0.5 * b
        decomp = beta_decomposition(r, b)
        assert decomp.beta == pytest.approx(0.5, rel=1e-12)
        assert decomp.specific.abs().max() < 1e-15

    def test_self_beta_is_one(self):
        idx = bdays("2021-01-04", 30)
        b = pd.Series(np.random.default_rng(3).normal(0, 0.01, 30), index=idx)
        assert beta_decomposition(b, b).beta == pytest.approx(1.0, rel=1e-12)

    def test_components_sum_to_total(self):
        idx = bdays("2021-01-04", 100)
        rng = np.random.default_rng(4)
        b = pd.Series(rng.normal(0, 0.01, 100), index=idx)
        r = pd.Series(0.3 * b.to_numpy() + rng.normal(0, 0.005, 100), index=idx)
        decomp = beta_decomposition(r, b)
        assert (decomp.common + decomp.specific - r).abs().max() <= 1e-12

    def test_rolling_beta_converges(self):
        idx = bdays("2021-01-04", 60)
        b = pd.Series(np.random.default_rng(5).normal(0, 0.01, 60), index=idx)
        decomp = beta_decomposition(0.5 * b, b, rolling_window=20)
        assert decomp.rolling_beta.iloc[:19].isna().all()
        np.testing.assert_allclose(
            decomp.rolling_beta.iloc[19:].to_numpy(), 0.5, rtol=1e-9
        )

    def test_index_mismatch(self):
        a = pd.Series([0.01, 0.02], index=bdays("2021-01-04", 2))
        b = pd.Series([0.01, 0.02], index=bdays("2021-01-05", 2))
        with pytest.raises(ValueError, match="share an index"):
            beta_decomposition(a, b)

    def test_flat_benchmark_rejected(self):
        idx = bdays("2021-01-04", 10)
        r = pd.Series(np.linspace(0, 0.01, 10), index=idx)
        with pytest.raises(ValueError, match="variance"):
            beta_decomposition(r, pd.Series(0.0, index=idx))


class TestAggregateReturns:
    def test_weekly_compounding(self):
        idx = bdays("2021-01-04", 10)
        rets = [0.01, 0.02, -0.01, 0.005, 0.0, 0.01, 0.01, 0.01, 0.01, 0.01]
        out = aggregate_returns(pd.Series(rets, index=idx), "weekly")
        want_w1 = 1.0
        for r in rets[:5]:
            want_w1 *= 1.0 + r
        want_w1 -= 1.0
        assert out.index.tolist() == ["2021-W01", "2021-W02"]
        assert out.loc["2021-W01"] == pytest.approx(want_w1, abs=1e-10)
        assert out.loc["2021-W02"] == pytest.approx(1.01**5 - 1.0, abs=1e-10)

    def test_monthly_compounding(self):
        idx = pd.DatetimeIndex(["2021-01-28", "2021-01-29", "2021-02-01"])
        out = aggregate_returns(pd.Series([0.1, -0.1, 0.02], index=idx), "monthly")
        assert out.index.tolist() == ["2021-01", "2021-02"]
        assert out.loc["2021-01"] == pytest.approx(1.1 * 0.9 - 1.0, abs=1e-10)
        assert out.loc["2021-02"] == pytest.approx(0.02, abs=1e-10)

    def test_iso_week_spans_year_end(self):
        # Jan 1 2021 falls in ISO week 53 of 2020
        idx = pd.DatetimeIndex(["2020-12-31", "2021-01-01", "2021-01-04"])
        out = aggregate_returns(pd.Series([0.01, 0.01, 0.01], index=idx), "weekly")
        assert out.index.tolist() == ["2020-W53", "2021-W01"]

    def test_unknown_period(self):
        idx = bdays("2021-01-04", 3)
        with pytest.raises(ValueError, match="unknown aggregation"):
            aggregate_returns(pd.Series([0.0] * 3, index=idx), "quarterly")

    def test_needs_datetime_index(self):
        with pytest.raises(ValueError, match="DatetimeIndex"):
            aggregate_returns(pd.Series([0.0, 0.1]), "weekly")


def make_factor_close(n_days=120, n_syms=9, seed=8, planted=False):
    rng = np.random.default_rng(seed)
    idx = bdays("2020-06-01", n_days)
    cols = [f"S{i:02d}" for i in range(n_syms)]
    rets = rng.normal(0.0, 0.01, (n_days, n_syms))
    if planted:
        drift = np.linspace(-0.004, 0.004, n_syms)
        rets = rets + drift
    close = pd.DataFrame(
        100.0 * np.cumprod(1.0 + rets, axis=0), index=idx, columns=cols
    )
    if planted:
        factor = pd.DataFrame(
            np.tile(drift, (n_days, 1)) + rng.normal(0, 1e-5, (n_days, n_syms)),
            index=idx,
            columns=cols,
        )
    else:
        factor = pd.DataFrame(
            rng.normal(size=(n_days, n_syms)), index=idx, columns=cols
        )
    return factor, close


class TestAssignQuantiles:
    def test_even_split_of_six(self):
        idx = bdays("2021-01-04", 1)
        factor = pd.DataFrame(
            [[0.5, 0.1, 0.9, 0.3, 0.7, 0.2]], index=idx, columns=list("ABCDEF")
        )
        out = assign_quantiles(factor, 3)
        assert out.iloc[0].tolist() == [2.0, 1.0, 3.0, 2.0, 3.0, 1.0]

    def test_uneven_split_floor_rule(self):
        idx = bdays("2021-01-04", 1)
        factor = pd.DataFrame(
            [[1.0, 2.0, 3.0, 4.0, 5.0]], index=idx, columns=list("ABCDE")
        )
        out = assign_quantiles(factor, 3)
        assert out.iloc[0].tolist() == [1.0, 1.0, 2.0, 2.0, 3.0]

    def test_ties_break_by_symbol_order(self):
        idx = bdays("2021-01-04", 1)
        factor = pd.DataFrame(
            [[1.0, 1.0, 1.0, 1.0]], index=idx, columns=list("DCBA")
        )
        out = assign_quantiles(factor, 2)
        # ties keep the panel's column order: leftmost columns fill
        # the low bucket first
        assert out.iloc[0].to_dict() == {"D": 1.0, "C": 1.0, "B": 2.0, "A": 2.0}

    def test_sparse_row_left_missing(self):
        idx = bdays("2021-01-04", 1)
        factor = pd.DataFrame(
            [[1.0, np.nan, 2.0, np.nan]], index=idx, columns=list("ABCD")
        )
        assert assign_quantiles(factor, 3).iloc[0].isna().all()

    def test_validation(self):
        factor, _ = make_factor_close(n_days=3)
        with pytest.raises(ValueError, match="at least 2"):
            assign_quantiles(factor, 1)


class TestQuantileReport:
    def test_planted_factor_orders_quantile_means(self):
        factor, close = make_factor_close(planted=True, seed=9)
        report = quantile_report(factor, close, n_quantiles=3)
        means = report.mean_returns[1]
        assert means.loc[1] < means.loc[2] < means.loc[3]
        assert report.top_minus_bottom.iloc[-1] > 0
        assert report.cumulative.columns.tolist() == ["q1", "q2", "q3"]

    def test_sign_reversal_swaps_buckets(self):
        # 9 symbols split 3/3/3: negating the factor exactly mirrors
        # bucket membership, so the outer quantile stats swap
        factor, close = make_factor_close(seed=10)
        a = quantile_report(factor, close, n_quantiles=3)
        b = quantile_report(-factor, close, n_quantiles=3)
        for h in (1, 5, 22):
            assert a.mean_returns.loc[3, h] == pytest.approx(
                b.mean_returns.loc[1, h], rel=1e-12
            )
            assert a.mean_returns.loc[1, h] == pytest.approx(
                b.mean_returns.loc[3, h], rel=1e-12
            )

    def test_factor_weighted_series_shape(self):
        factor, close = make_factor_close(seed=11)
        report = quantile_report(factor, close)
        assert report.factor_weighted.index.equals(factor.index)
        assert np.isfinite(report.factor_weighted.to_numpy()).all()

    def test_distribution_table_contract(self):
        factor, close = make_factor_close(seed=12)
        report = quantile_report(factor, close, n_quantiles=3, horizons=(1, 5))
        dist = report.distributions
        assert len(dist) == 3 * 2
        assert {"quantile", "horizon", "count", "mean", "std"} <= set(dist.columns)
        assert (dist["p01"] <= dist["p99"]).all()

    def test_alignment_required(self):
        factor, close = make_factor_close()
        with pytest.raises(ValueError, match="aligned"):
            quantile_report(factor.iloc[:, :-1], close)

    def test_bad_horizon(self):
        factor, close = make_factor_close()
        with pytest.raises(ValueError, match="positive"):
            quantile_report(factor, close, horizons=(0,))


def make_tearsheet_inputs():
    idx = bdays("2021-01-04", 3)
    equity = pd.Series([100.0, 110.0, 99.0], index=idx)
    bench = pd.Series([0.05, -0.05], index=idx[1:])
    post = idx[1:]
    holdings = pd.Series([10, 10], index=post)
    lev = pd.Series([1.0, 1.0], index=post)
    long_v = pd.Series([50.0, 50.0], index=post)
    short_v = pd.Series([-50.0, -25.0], index=post)
    return equity, bench, holdings, lev, long_v, short_v


class TestTearSheet:
    def test_hand_scalars(self):
        # +10% then -10%: total is exactly -1%, beta 2, no residual
        equity, bench, holdings, lev, long_v, short_v = make_tearsheet_inputs()
        ts = build_tearsheet(equity, bench, holdings, lev, long_v, short_v)
        assert ts.total_return_pct == pytest.approx(-1.0, abs=1e-12)
        assert ts.portfolio_beta == pytest.approx(2.0, rel=1e-12)
        assert ts.common_return_pct == pytest.approx(-1.0, abs=1e-9)
        assert ts.specific_return_pct == pytest.approx(0.0, abs=1e-9)
        assert ts.max_drawdown_pct == pytest.approx(-10.0, rel=1e-12)
        assert ts.daily_volatility == pytest.approx(
            np.std([0.1, -0.1], ddof=1), rel=1e-12
        )
        assert ts.long_short_ratio.tolist() == [1.0, 2.0]

    def test_write_is_deterministic(self, tmp_path):
        equity, bench, holdings, lev, long_v, short_v = make_tearsheet_inputs()
        ts = build_tearsheet(equity, bench, holdings, lev, long_v, short_v)
        p1 = write_tearsheet(ts, tmp_path / "a")
        p2 = write_tearsheet(ts, tmp_path / "b")
        assert p1.read_bytes() == p2.read_bytes()
        payload = json.loads(p1.read_text())
        assert payload["total_return_pct"] == pytest.approx(-1.0)
        assert set(payload["series_files"].values()) == {
            f.name for f in p1.parent.glob("*.csv")
        }

    def test_quantile_report_files(self, tmp_path):
        factor, close = make_factor_close(seed=13)
        report = quantile_report(factor, close)
        write_quantile_report(report, tmp_path)
        names = {f.name for f in tmp_path.glob("*.csv")}
        assert names == {
            "quantile_mean_returns.csv",
            "cumulative_by_quantile.csv",
            "factor_weighted_cumulative.csv",
            "top_minus_bottom_smoothed.csv",
            "quantile_distributions.csv",
        }
