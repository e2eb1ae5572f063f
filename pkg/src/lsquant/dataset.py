"""Label construction and training-window assembly.

Labels are cross-sectional forward-return quantiles: on each date the
top share of defined forward returns is +1, the bottom share -1, the
middle 0. A training window as of date T collects the labeled samples
from the trailing window whose forward returns are fully realized by T,
so nothing later than T ever leaks in.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import InsufficientHistoryError


def forward_returns(close: pd.DataFrame, horizon: int = 5) -> pd.DataFrame:
    """(P_{t+h} - P_t) / P_t per symbol; the last h dates are missing."""
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    future = close.shift(-horizon)
    return (future - close) / close


def quantile_labels(
    fwd: pd.DataFrame, upper: float = 0.3, lower: float = 0.3
) -> pd.DataFrame:
    """Rank each date's defined forward returns into {+1, 0, -1}.

    ceil(upper*k) symbols with the highest returns get +1 and
    ceil(lower*k) with the lowest get -1, ties broken by symbol order so
    the split is deterministic. Dates with fewer than 3 defined returns
    are left entirely missing.
    """
    if not (0 < upper < 1 and 0 < lower < 1 and upper + lower <= 1):
        raise ValueError("need 0 < upper, lower and upper + lower <= 1")
    values = fwd.to_numpy(dtype=float)
    out = np.full_like(values, np.nan)
    col_idx = np.arange(values.shape[1])
    for i in range(values.shape[0]):
        row = values[i]
        defined = np.isfinite(row)
        k = int(defined.sum())
        if k < 3:
            continue
        n_up = math.ceil(upper * k)
        n_dn = min(math.ceil(lower * k), k - n_up)
        cols = col_idx[defined]
        order = cols[np.lexsort((cols, -row[defined]))]
        out[i, order] = 0.0
        out[i, order[:n_up]] = 1.0
        if n_dn > 0:
            out[i, order[k - n_dn :]] = -1.0
    return pd.DataFrame(out, index=fwd.index, columns=fwd.columns)


@dataclass
class TrainingWindow:
    """Dense design matrix for one as-of date."""

    X: np.ndarray
    y: np.ndarray
    feature_names: list[str]
    asof: pd.Timestamp
    dates: np.ndarray
    symbols: np.ndarray
    dropped_columns: list[str] = field(default_factory=list)
    n_dropped_rows: int = 0

    def to_frame(self) -> pd.DataFrame:
        out = pd.DataFrame(self.X, columns=self.feature_names)
        out.insert(0, "label", self.y)
        out.insert(0, "symbol", self.symbols)
        out.insert(0, "date", self.dates)
        return out


def stack_factor_panels(
    factors: dict[str, pd.DataFrame], labels: pd.DataFrame
) -> tuple[list[str], np.ndarray]:
    """Validate alignment and stack factors into (date, symbol, factor)."""
    axis = labels.index
    for name, panel in factors.items():
        if not panel.index.equals(axis) or not panel.columns.equals(labels.columns):
            raise ValueError(f"factor {name} is not aligned with labels")
    names = list(factors)
    if not names:
        raise ValueError("no factors given")
    block = np.stack([factors[n].to_numpy(dtype=float) for n in names], axis=2)
    return names, block


def build_training_window(
    factors: dict[str, pd.DataFrame],
    labels: pd.DataFrame,
    asof,
    window: int = 200,
    horizon: int = 5,
    max_missing: float = 0.3,
    exclude_zero_labels: bool = False,
) -> TrainingWindow:
    """Assemble the labeled samples visible at `asof`.

    Rows come from the trailing `window` sessions ending at asof, keeping
    only dates at least `horizon` sessions old (their labels are realized
    by asof). Feature columns missing on more than `max_missing` of the
    candidate rows are dropped whole; rows still missing any kept feature
    are then dropped. Columns stay in the order of the `factors` mapping.
    `exclude_zero_labels` trains on the +-1 extremes only.
    """
    names, block = stack_factor_panels(factors, labels)
    return window_from_block(
        block,
        names,
        labels.to_numpy(dtype=float),
        labels.index,
        labels.columns,
        asof,
        window=window,
        horizon=horizon,
        max_missing=max_missing,
        exclude_zero_labels=exclude_zero_labels,
    )


def window_from_block(
    block: np.ndarray,
    names: list[str],
    y_values: np.ndarray,
    index: pd.DatetimeIndex,
    columns: pd.Index,
    asof,
    window: int = 200,
    horizon: int = 5,
    max_missing: float = 0.3,
    exclude_zero_labels: bool = False,
) -> TrainingWindow:
    """build_training_window over a pre-stacked factor block.

    The walk-forward loop stacks factors once and calls this per
    rebalance instead of re-extracting every panel.
    """
    if horizon >= window:
        raise ValueError("window must exceed horizon")
    asof = pd.Timestamp(asof)
    locs = index.get_indexer([asof])
    if locs[0] < 0:
        raise ValueError(f"asof {asof.date()} not on the date axis")
    pos = int(locs[0])
    if pos < window - 1:
        raise InsufficientHistoryError(
            f"asof {asof.date()} has only {pos + 1} sessions, window is {window}"
        )
    lo, hi = pos - window + 1, pos - horizon

    y_block = y_values[lo : hi + 1]
    labeled = np.isfinite(y_block)
    if exclude_zero_labels:
        labeled &= y_block != 0
    date_pos, sym_pos = np.nonzero(labeled)
    if len(date_pos) == 0:
        raise InsufficientHistoryError(f"no labeled samples in window at {asof.date()}")

    X_all = block[lo : hi + 1][date_pos, sym_pos, :]
    missing_frac = np.mean(~np.isfinite(X_all), axis=0)
    keep_cols = missing_frac <= max_missing
    dropped_columns = [n for n, k in zip(names, keep_cols) if not k]
    X_kept = X_all[:, keep_cols]
    kept_names = [n for n, k in zip(names, keep_cols) if k]

    full_rows = np.all(np.isfinite(X_kept), axis=1)
    n_dropped_rows = int((~full_rows).sum())
    if not full_rows.any():
        raise InsufficientHistoryError(
            f"no complete training rows at {asof.date()} after column drops"
        )

    dates = index.to_numpy()[lo : hi + 1][date_pos[full_rows]]
    symbols = columns.to_numpy()[sym_pos[full_rows]]
    return TrainingWindow(
        X=np.ascontiguousarray(X_kept[full_rows]),
        y=y_block[labeled][full_rows].astype(np.int64),
        feature_names=kept_names,
        asof=asof,
        dates=dates,
        symbols=symbols,
        dropped_columns=dropped_columns,
        n_dropped_rows=n_dropped_rows,
    )
