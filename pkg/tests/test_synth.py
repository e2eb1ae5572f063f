"""Seeded market generator: determinism, bar sanity, planted signal."""
import numpy as np
import pandas as pd
import pytest

from lsquant.market_data import ingest_bars
from lsquant.synth import SynthConfig, SynthMarket, generate_market, read_latent, write_market


@pytest.fixture(scope="module")
def market():
    return generate_market(SynthConfig(n_symbols=15, n_days=310, seed=41))


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n_symbols": 9},
            {"n_days": 299},
            {"signal_strength": 1.5},
            {"signal_strength": -0.1},
            {"rho": 1.0},
        ],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            SynthConfig(**kwargs)


class TestDeterminism:
    def test_same_config_same_bytes(self, market):
        again = generate_market(SynthConfig(n_symbols=15, n_days=310, seed=41))
        assert market.bars.to_csv(index=False) == again.bars.to_csv(index=False)
        assert market.fundamentals.to_csv(index=False) == (
            again.fundamentals.to_csv(index=False)
        )
        pd.testing.assert_frame_equal(market.latent, again.latent)

    def test_seed_changes_prices(self, market):
        other = generate_market(SynthConfig(n_symbols=15, n_days=310, seed=42))
        assert not market.bars["close"].equals(other.bars["close"])


class TestBars:
    def test_shape_and_calendar(self, market):
        assert len(market.bars) == 310 * 15
        dates = pd.to_datetime(market.bars["date"].unique())
        assert len(dates) == 310
        assert (dates == pd.bdate_range("2015-01-02", periods=310)).all()
        assert market.bars["symbol"].nunique() == 15

    def test_ohlc_ordering(self, market):
        bars = market.bars
        assert (bars["high"] >= bars[["open", "close"]].max(axis=1) - 1e-9).all()
        assert (bars["low"] <= bars[["open", "close"]].min(axis=1) + 1e-9).all()
        assert (bars["low"] > 0).all()

    def test_volume_positive_integers(self, market):
        vol = market.bars["volume"]
        assert (vol >= 1).all()
        assert (vol == vol.astype(np.int64)).all()

    def test_ingest_accepts_every_row(self, market, tmp_path):
        paths = write_market(market, tmp_path)
        data, report = ingest_bars(paths["bars"])
        assert report.rows_read == report.rows_accepted == 310 * 15
        assert report.rejected == {}
        panels = market.to_market_data()
        pd.testing.assert_frame_equal(data.close, panels.close, check_names=False)


class TestFundamentals:
    def test_accounting_identity(self, market):
        wide = market.fundamentals.pivot_table(
            index=["date", "symbol"], columns="field", values="value"
        )
        gap = (
            wide["total_assets"]
            - wide["total_liabilities"]
            - wide["shareholders_equity"]
        )
        # statements are rounded to cents, so allow rounding residue
        assert gap.abs().max() <= 0.02

    def test_quarterly_cadence(self, market):
        dates = pd.to_datetime(market.fundamentals["date"].unique())
        assert len(dates) == int(np.ceil(310 / 63))
        calendar = pd.bdate_range("2015-01-02", periods=310)
        assert set(dates) <= set(calendar[::63])

    def test_every_symbol_reports_every_field(self, market):
        counts = market.fundamentals.groupby(["date", "symbol"])["field"].nunique()
        assert (counts == 15).all()


class TestLatentSignal:
    def test_panel_shape(self, market):
        assert market.latent.shape == (310, 15)
        assert np.isfinite(market.latent.to_numpy()).all()
        # AR(1) with unit stationary variance
        assert 0.7 < market.latent.to_numpy().std() < 1.3

    def corr_with_lagged_score(self, strength, seed=43):
        mkt = generate_market(
            SynthConfig(n_symbols=20, n_days=400, signal_strength=strength, seed=seed)
        )
        close = mkt.to_market_data().close
        rets = close.pct_change().to_numpy()[1:].ravel()
        lagged = mkt.latent.to_numpy()[:-1].ravel()
        keep = np.isfinite(rets)
        return float(np.corrcoef(lagged[keep], rets[keep])[0, 1])

    def test_strength_zero_is_null(self):
        assert abs(self.corr_with_lagged_score(0.0)) < 0.03

    def test_planted_score_drives_returns(self):
        assert self.corr_with_lagged_score(0.8) > 0.1


class TestRoundTrip:
    def test_write_and_read_latent(self, market, tmp_path):
        paths = write_market(market, tmp_path)
        assert set(paths) == {"bars", "fundamentals", "latent"}
        back = read_latent(paths["latent"])
        pd.testing.assert_frame_equal(
            back, market.latent, check_freq=False, rtol=0, atol=0
        )

    def test_write_twice_identical(self, market, tmp_path):
        a = write_market(market, tmp_path / "a")
        b = write_market(market, tmp_path / "b")
        for key in a:
            assert a[key].read_bytes() == b[key].read_bytes()
