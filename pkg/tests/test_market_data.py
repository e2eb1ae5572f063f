import numpy as np
import pandas as pd
import pytest

from lsquant.errors import InputDataError
from lsquant.market_data import (
    MarketData,
    build_universe,
    ingest_bars,
    ingest_fundamentals,
    read_panels,
    write_panels,
)

GOOD_BARS = """date,symbol,open,high,low,close,volume
2022-01-03,AAA,10,11,9,10.5,1000
2022-01-03,BBB,20,22,19,21,500
2022-01-04,AAA,10.5,12,10,11.5,1100
2022-01-04,BBB,21,21.5,20,20.5,600
"""


def write(tmp_path, text, name="bars.csv"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestIngestBars:
    def test_clean_file(self, tmp_path):
        data, report = ingest_bars(write(tmp_path, GOOD_BARS))
        assert report.rows_read == 4 and report.rows_accepted == 4
        assert report.rejected == {}
        assert data.symbols == ["AAA", "BBB"]
        assert data.close.loc["2022-01-04", "AAA"] == 11.5
        assert data.volume.dtypes.unique().tolist() == [np.float64]

    def test_row_rejection_reasons(self, tmp_path):
        text = GOOD_BARS + (
            "not-a-date,AAA,10,11,9,10.5,100\n"      # bad_date
            "2022-01-05,AAA,-5,11,9,10.5,100\n"      # bad_price
            "2022-01-05,BBB,20,22,19,21,12.5\n"      # bad_volume
            "2022-01-06,AAA,10,10.2,9,10.5,100\n"    # high < close
        )
        data, report = ingest_bars(write(tmp_path, text))
        assert report.rows_accepted == 4
        assert report.rejected == {
            "bad_date": 1,
            "bad_price": 1,
            "bad_volume": 1,
            "bad_range": 1,
        }
        # every row on the bad dates was rejected, so they never enter the calendar
        assert data.dates.max() == pd.Timestamp("2022-01-04")

    def test_duplicate_keys_keep_last(self, tmp_path):
        text = GOOD_BARS + "2022-01-04,AAA,10.5,12,10,11.9,1200\n"
        data, report = ingest_bars(write(tmp_path, text))
        assert report.duplicates_resolved == 1
        assert data.close.loc["2022-01-04", "AAA"] == 11.9

    def test_schema_mapping(self, tmp_path):
        text = GOOD_BARS.replace("date,symbol", "dt,ticker")
        path = write(tmp_path, text)
        with pytest.raises(InputDataError, match="missing columns"):
            ingest_bars(path)
        data, _ = ingest_bars(path, schema={"dt": "date", "ticker": "symbol"})
        assert data.symbols == ["AAA", "BBB"]

    def test_all_rows_bad_raises(self, tmp_path):
        path = write(tmp_path, "date,symbol,open,high,low,close,volume\nx,A,1,1,1,1,1\n")
        with pytest.raises(InputDataError, match="no valid rows"):
            ingest_bars(path)

    def test_missing_file_names_path(self, tmp_path):
        with pytest.raises(InputDataError, match="nope.csv"):
            ingest_bars(str(tmp_path / "nope.csv"))


FUND = """date,symbol,field,value
2022-01-03,AAA,total_assets,100
2022-01-03,AAA,total_liabilities,60
2022-01-03,AAA,shareholders_equity,40
2022-01-03,AAA,made_up_field,1
2022-01-03,BBB,total_assets,bad
"""


class TestIngestFundamentals:
    def test_field_filter_and_value_check(self, tmp_path):
        rows, report = ingest_fundamentals(write(tmp_path, FUND, "f.csv"))
        assert report.rows_accepted == 3
        assert report.rejected == {"unknown_field": 1, "bad_value": 1}
        assert set(rows["field"]) == {
            "total_assets",
            "total_liabilities",
            "shareholders_equity",
        }

    def test_accounting_identity_flag(self, tmp_path):
        broken = FUND.replace(
            "2022-01-03,AAA,shareholders_equity,40",
            "2022-01-03,AAA,shareholders_equity,55",
        )
        _, report = ingest_fundamentals(write(tmp_path, broken, "f.csv"))
        assert report.flags.get("accounting_identity", 0) == 1
        _, clean_report = ingest_fundamentals(write(tmp_path, FUND, "f2.csv"))
        assert clean_report.flags.get("accounting_identity", 0) == 0


class TestUniverse:
    def test_top_n_by_trailing_dollar_volume(self):
        idx = pd.bdate_range("2022-01-03", periods=10)
        dv = pd.DataFrame(
            {"A": 100.0, "B": 300.0, "C": 200.0}, index=idx, dtype=float
        )
        members = build_universe(dv, n=2, lookback=3, cadence="daily")
        assert members.dtypes.unique().tolist() == [np.dtype(bool)]
        # the trailing mean completes on the third session; before that, nothing
        assert not members.iloc[:2].any().any()
        assert members.iloc[2].to_dict() == {"A": False, "B": True, "C": True}
        assert members.iloc[-1].to_dict() == {"A": False, "B": True, "C": True}

    def test_monthly_membership_holds_between_recomputes(self):
        idx = pd.bdate_range("2022-01-03", periods=45)
        rng = np.random.default_rng(0)
        dv = pd.DataFrame(
            rng.uniform(10, 100, (45, 4)), index=idx, columns=list("ABCD")
        )
        members = build_universe(dv, n=2, lookback=10, cadence="monthly")
        feb = members.loc["2022-02-01":"2022-02-28"]
        assert len(feb) > 1
        assert (feb == feb.iloc[0]).all().all()

    def test_untraded_symbol_drops_out(self):
        idx = pd.bdate_range("2022-01-03", periods=8)
        dv = pd.DataFrame({"A": 100.0, "B": 50.0}, index=idx)
        dv.loc[idx[6], "A"] = np.nan
        members = build_universe(dv, n=2, lookback=3, cadence="daily")
        assert not members.loc[idx[6], "A"]
        assert members.loc[idx[7], "A"]


def test_panel_round_trip(tmp_path, bar_panels):
    panels = bar_panels(12, 3, seed=5)
    data = MarketData(**{k: panels[k].astype(float) for k in panels})
    write_panels(data, str(tmp_path))
    back = read_panels(str(tmp_path))
    for name, p in data.field_panels().items():
        got = back.field_panels()[name]
        pd.testing.assert_frame_equal(got, p, check_freq=False, check_names=False)


def test_read_panels_missing_file(tmp_path):
    with pytest.raises(InputDataError, match="panel_open"):
        read_panels(str(tmp_path))
