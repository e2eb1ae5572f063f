"""Bar and fundamentals ingestion, tradable-universe construction, persistence.

Input wire formats
------------------
bars CSV          date,symbol,open,high,low,close,volume
fundamentals CSV  date,symbol,field,value   (long form, point-in-time rows)
universe CSV      date,symbol               (emitted, one row per member-day)

Rows that violate per-row invariants are dropped and counted by reason;
a file that cannot be parsed at all raises InputDataError.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import InputDataError
from .panels import align_panels, validate_panel

BAR_COLUMNS = ["date", "symbol", "open", "high", "low", "close", "volume"]

# Point-in-time statement fields accepted by the fundamentals reader.
# shares_outstanding rides along so market value can be derived for yields.
FUNDAMENTAL_FIELDS = frozenset(
    {
        "total_assets",
        "total_liabilities",
        "shareholders_equity",
        "operating_cash_flow",
        "capital_expenditure",
        "revenue",
        "cogs",
        "operating_expenses",
        "net_income",
        "interest",
        "taxes",
        "nopat",
        "invested_capital",
        "ebitda",
        "shares_outstanding",
    }
)

# Relative tolerance for the assets = liabilities + equity sanity check.
# Violations are counted, never repaired: vendor data disagrees routinely.
ACCOUNTING_IDENTITY_RTOL = 1e-6


@dataclass
class ValidationReport:
    """Counts describing what ingestion kept, dropped and flagged."""

    rows_read: int = 0
    rows_accepted: int = 0
    rejected: dict = field(default_factory=dict)
    duplicates_resolved: int = 0
    flags: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "rows_read": self.rows_read,
            "rows_accepted": self.rows_accepted,
            "rejected": dict(sorted(self.rejected.items())),
            "duplicates_resolved": self.duplicates_resolved,
            "flags": dict(sorted(self.flags.items())),
        }


@dataclass
class MarketData:
    """Aligned OHLCV panels plus the raw point-in-time fundamentals rows."""

    open: pd.DataFrame
    high: pd.DataFrame
    low: pd.DataFrame
    close: pd.DataFrame
    volume: pd.DataFrame
    fundamentals: pd.DataFrame | None = None

    @property
    def dates(self) -> pd.DatetimeIndex:
        return self.close.index

    @property
    def symbols(self) -> list[str]:
        return list(self.close.columns)

    def field_panels(self) -> dict[str, pd.DataFrame]:
        return {
            "open": self.open,
            "high": self.high,
            "low": self.low,
            "close": self.close,
            "volume": self.volume,
        }


def _read_csv(path: str, required: list[str], schema: dict | None) -> pd.DataFrame:
    if not os.path.exists(path):
        raise InputDataError(f"no such file: {path}")
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False)
    except Exception as exc:
        raise InputDataError(f"cannot parse {path}: {exc}") from exc
    if schema:
        raw = raw.rename(columns=schema)
    missing = [c for c in required if c not in raw.columns]
    if missing:
        raise InputDataError(f"{path}: missing columns {missing}")
    return raw


def _count(rejected: dict, mask: pd.Series, reason: str) -> pd.Series:
    n = int(mask.sum())
    if n:
        rejected[reason] = rejected.get(reason, 0) + n
    return ~mask


def ingest_bars(
    path: str, schema: dict | None = None
) -> tuple[MarketData, ValidationReport]:
    """Read an OHLCV CSV into aligned panels.

    Parameters
    ----------
    path : str
        CSV with header date,symbol,open,high,low,close,volume.
    schema : dict, optional
        Mapping from the file's column names onto the canonical ones,
        for vendors with different headers.

    Returns
    -------
    (MarketData, ValidationReport)
        Panels are aligned on the union of dates and sorted symbols;
        cells never observed are NaN. Per-row invariants: positive
        finite prices, low <= min(open, close) <= max(open, close) <= high,
        integral volume >= 0. Duplicate (date, symbol) keys resolve to the
        last row in file order.
    """
    raw = _read_csv(path, BAR_COLUMNS, schema)
    report = ValidationReport(rows_read=len(raw))
    rej = report.rejected

    dates = pd.to_datetime(raw["date"], errors="coerce", format="mixed")
    keep = _count(rej, dates.isna(), "bad_date")

    symbols = raw["symbol"].str.strip()
    keep &= _count(rej, symbols == "", "bad_symbol")

    prices = {}
    for col in ("open", "high", "low", "close"):
        vals = pd.to_numeric(raw[col], errors="coerce")
        keep &= _count(rej, keep & ~(vals > 0), "bad_price")
        prices[col] = vals
    vol = pd.to_numeric(raw["volume"], errors="coerce")
    bad_vol = ~np.isfinite(vol) | (vol < 0) | (vol != np.floor(vol))
    keep &= _count(rej, keep & bad_vol, "bad_volume")

    body_low = np.minimum(prices["open"], prices["close"])
    body_high = np.maximum(prices["open"], prices["close"])
    bad_range = (prices["low"] > body_low) | (prices["high"] < body_high)
    keep &= _count(rej, keep & bad_range, "bad_range")

    clean = pd.DataFrame(
        {
            "date": dates,
            "symbol": symbols,
            **prices,
            "volume": vol,
        }
    )[keep]
    dup_mask = clean.duplicated(subset=["date", "symbol"], keep="last")
    report.duplicates_resolved = int(dup_mask.sum())
    clean = clean[~dup_mask]
    report.rows_accepted = len(clean)
    if clean.empty:
        raise InputDataError(f"{path}: no valid rows")

    panels = {
        col: clean.pivot(index="date", columns="symbol", values=col)
        for col in ("open", "high", "low", "close", "volume")
    }
    panels = align_panels(panels)
    for name, p in panels.items():
        validate_panel(p, name)
    return MarketData(**panels), report


def ingest_fundamentals(path: str) -> tuple[pd.DataFrame, ValidationReport]:
    """Read long-form fundamentals rows, keeping only known fields.

    Returns the accepted rows sorted by (symbol, field, date) plus a
    report. The assets = liabilities + equity identity is checked where
    all three fields coexist on a (date, symbol) key; mismatches beyond
    tolerance increment flags['accounting_identity'] but stay in the data.
    """
    raw = _read_csv(path, ["date", "symbol", "field", "value"], None)
    report = ValidationReport(rows_read=len(raw))
    rej = report.rejected

    dates = pd.to_datetime(raw["date"], errors="coerce", format="mixed")
    keep = _count(rej, dates.isna(), "bad_date")
    symbols = raw["symbol"].str.strip()
    keep &= _count(rej, symbols == "", "bad_symbol")
    fields = raw["field"].str.strip()
    keep &= _count(rej, keep & ~fields.isin(FUNDAMENTAL_FIELDS), "unknown_field")
    values = pd.to_numeric(raw["value"], errors="coerce")
    keep &= _count(rej, keep & ~np.isfinite(values), "bad_value")

    clean = pd.DataFrame(
        {"date": dates, "symbol": symbols, "field": fields, "value": values}
    )[keep]
    dup = clean.duplicated(subset=["date", "symbol", "field"], keep="last")
    report.duplicates_resolved = int(dup.sum())
    clean = clean[~dup]
    report.rows_accepted = len(clean)

    wide = clean.pivot_table(
        index=["date", "symbol"], columns="field", values="value", aggfunc="last"
    )
    cols = set(wide.columns)
    if {"total_assets", "total_liabilities", "shareholders_equity"} <= cols:
        a = wide["total_assets"]
        le = wide["total_liabilities"] + wide["shareholders_equity"]
        both = a.notna() & le.notna()
        tol = ACCOUNTING_IDENTITY_RTOL * np.maximum(1.0, a.abs())
        flagged = int(((a - le).abs() > tol)[both].sum())
        if flagged:
            report.flags["accounting_identity"] = flagged

    clean = clean.sort_values(["symbol", "field", "date"], kind="stable")
    return clean.reset_index(drop=True), report


def build_universe(
    dollar_volume: pd.DataFrame,
    n: int = 1500,
    lookback: int = 63,
    cadence: str = "monthly",
) -> pd.DataFrame:
    """Select the top-n symbols by trailing mean dollar volume.

    Membership is recomputed on the first session of each calendar month
    (cadence='monthly', the default) or every session (cadence='daily'),
    and only on dates with at least `lookback` sessions of prior history.
    Between recomputes membership is held, intersected with symbols that
    actually traded that day. Returns a boolean panel.
    """
    if n <= 0 or lookback <= 0:
        raise ValueError("n and lookback must be positive")
    if cadence not in ("monthly", "daily"):
        raise ValueError(f"unknown cadence: {cadence}")
    validate_panel(dollar_volume, "dollar_volume")

    trailing = dollar_volume.rolling(lookback, min_periods=1).mean()
    traded = dollar_volume.notna()
    out = pd.DataFrame(False, index=dollar_volume.index, columns=dollar_volume.columns)

    idx = dollar_volume.index
    if cadence == "daily":
        recompute = np.ones(len(idx), dtype=bool)
    else:
        months = idx.to_period("M")
        recompute = np.r_[True, months[1:] != months[:-1]]
    recompute &= np.arange(len(idx)) >= lookback - 1

    current: list[str] = []
    have_members = False
    for i, date in enumerate(idx):
        if recompute[i]:
            row = trailing.iloc[i]
            eligible = row[traded.iloc[i] & row.notna()]
            ranked = eligible.sort_values(ascending=False, kind="stable")
            current = list(ranked.index[:n])
            have_members = True
        if have_members and current:
            live = traded.columns[traded.iloc[i].values]
            out.iloc[i] = out.columns.isin(set(current) & set(live))
    return out


def universe_to_rows(universe: pd.DataFrame) -> pd.DataFrame:
    """Boolean membership panel -> long (date, symbol) rows."""
    rows = universe.stack()
    rows = rows[rows]
    out = rows.reset_index()[["date", "symbol"]]
    out.columns = ["date", "symbol"]
    return out


def write_universe(universe: pd.DataFrame, path: str) -> None:
    universe_to_rows(universe).to_csv(path, index=False, date_format="%Y-%m-%d")


def write_panels(data: MarketData, out_dir: str) -> list[str]:
    """Persist each OHLCV panel as a wide CSV; values survive bit-exactly."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for name, panel in data.field_panels().items():
        path = os.path.join(out_dir, f"panel_{name}.csv")
        panel.to_csv(path, date_format="%Y-%m-%d", index_label="date")
        written.append(path)
    if data.fundamentals is not None:
        path = os.path.join(out_dir, "fundamentals.csv")
        data.fundamentals.to_csv(path, index=False, date_format="%Y-%m-%d")
        written.append(path)
    return written


def read_panels(in_dir: str) -> MarketData:
    """Load panels written by write_panels."""
    panels = {}
    for name in ("open", "high", "low", "close", "volume"):
        path = os.path.join(in_dir, f"panel_{name}.csv")
        if not os.path.exists(path):
            raise InputDataError(f"missing panel file: {path}")
        p = pd.read_csv(
            path, index_col="date", parse_dates=True, float_precision="round_trip"
        )
        panels[name] = p.astype(float)
    fpath = os.path.join(in_dir, "fundamentals.csv")
    fundamentals = None
    if os.path.exists(fpath):
        fundamentals = pd.read_csv(
            fpath, parse_dates=["date"], float_precision="round_trip"
        )
    md = MarketData(**panels, fundamentals=fundamentals)
    for name, p in md.field_panels().items():
        validate_panel(p, name)
    return md
