"""Dense date-by-symbol panels.

A panel is a pandas DataFrame with a strictly increasing DatetimeIndex,
one column per symbol and float64 values; NaN marks missing. All modules
downstream of ingestion trade in this shape.
"""
from __future__ import annotations

import pandas as pd

from .errors import InputDataError


def validate_panel(panel: pd.DataFrame, name: str = "panel") -> pd.DataFrame:
    """Check panel invariants, returning the panel unchanged."""
    if not isinstance(panel.index, pd.DatetimeIndex):
        raise InputDataError(f"{name}: index must be a DatetimeIndex")
    if not panel.index.is_monotonic_increasing or panel.index.has_duplicates:
        raise InputDataError(f"{name}: dates must be strictly increasing")
    if panel.columns.has_duplicates:
        raise InputDataError(f"{name}: duplicate symbols")
    return panel


def align_panels(panels: dict[str, pd.DataFrame]) -> dict[str, pd.DataFrame]:
    """Reindex all panels onto the union of their dates and symbols."""
    dates = None
    symbols = None
    for p in panels.values():
        dates = p.index if dates is None else dates.union(p.index)
        symbols = p.columns if symbols is None else symbols.union(p.columns)
    return {
        k: p.reindex(index=dates, columns=sorted(symbols)).astype(float)
        for k, p in panels.items()
    }


def to_long(panel: pd.DataFrame, value_name: str = "value") -> pd.DataFrame:
    """Flatten a panel to (date, symbol, value) rows, dropping missing cells."""
    long = panel.stack()
    long.name = value_name
    out = long.reset_index()
    out.columns = ["date", "symbol", value_name]
    return out


def from_long(rows: pd.DataFrame, value_name: str = "value") -> pd.DataFrame:
    """Pivot (date, symbol, value) rows back into a dense panel."""
    panel = rows.pivot(index="date", columns="symbol", values=value_name)
    panel.index = pd.DatetimeIndex(panel.index)
    return panel.sort_index().astype(float)
