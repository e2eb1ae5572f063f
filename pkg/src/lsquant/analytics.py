"""Performance statistics and factor diagnostics.

Everything here is a pure function over series or panels; the backtest
produces the inputs and the CLI persists the outputs. The tear sheet
bundles headline scalars with the daily series needed to replot them,
and the quantile report captures how forward returns spread across
factor ranks.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

PERCENTILES = (1, 5, 25, 50, 75, 95, 99)


def sharpe(
    returns: pd.Series, rf: float = 0.0, periods_per_year: int = 252
) -> float | None:
    """Annualized mean/std of excess returns; None when the deviation
    is zero (the ratio is undefined, not infinite)."""
    r = pd.Series(returns).dropna().to_numpy(dtype=float) - rf
    if len(r) < 2:
        raise ValueError("sharpe needs at least 2 observations")
    std = r.std(ddof=1)
    if std == 0.0:
        return None
    return float(r.mean() / std * np.sqrt(periods_per_year))


def max_drawdown(equity: pd.Series) -> float:
    """Worst peak-to-trough decline as a fraction of the peak (<= 0)."""
    values = pd.Series(equity).dropna().to_numpy(dtype=float)
    if len(values) == 0:
        raise ValueError("empty equity curve")
    if (values <= 0).any():
        raise ValueError("equity values must be positive")
    peaks = np.maximum.accumulate(values)
    return float(np.min((values - peaks) / peaks))


@dataclass
class BetaDecomposition:
    beta: float
    common: pd.Series
    specific: pd.Series
    rolling_beta: pd.Series
    cum_common: pd.Series
    cum_specific: pd.Series


def beta_decomposition(
    portfolio_returns: pd.Series,
    benchmark_returns: pd.Series,
    rolling_window: int = 126,
) -> BetaDecomposition:
    """Split returns into a benchmark-beta component and a residual.

    Full-sample least-squares beta (with intercept) defines
    common_t = beta * bench_t and specific_t = r_t - common_t, so the
    two components add back to the total exactly.
    """
    if not portfolio_returns.index.equals(benchmark_returns.index):
        raise ValueError("portfolio and benchmark series must share an index")
    r = portfolio_returns.astype(float)
    b = benchmark_returns.astype(float)
    bvar = b.var(ddof=0)
    if not np.isfinite(bvar) or bvar == 0.0:
        raise ValueError("benchmark variance is zero; beta undefined")
    beta = float(((r - r.mean()) * (b - b.mean())).mean() / bvar)
    common = beta * b
    specific = r - common
    rolling_cov = r.rolling(rolling_window).cov(b)
    rolling_var = b.rolling(rolling_window).var()
    rolling_beta = rolling_cov / rolling_var.where(rolling_var != 0.0)
    return BetaDecomposition(
        beta=beta,
        common=common,
        specific=specific,
        rolling_beta=rolling_beta,
        cum_common=(1.0 + common).cumprod() - 1.0,
        cum_specific=(1.0 + specific).cumprod() - 1.0,
    )


def aggregate_returns(daily: pd.Series, period: str) -> pd.Series:
    """Compound a daily return series into ISO weeks or calendar months.

    Labels are "YYYY-Www" / "YYYY-MM" strings, which sort chronologically.
    """
    if not isinstance(daily.index, pd.DatetimeIndex):
        raise ValueError("daily returns need a DatetimeIndex")
    if period == "weekly":
        iso = daily.index.isocalendar()
        keys = [f"{y:04d}-W{w:02d}" for y, w in zip(iso["year"], iso["week"])]
    elif period == "monthly":
        keys = [f"{d.year:04d}-{d.month:02d}" for d in daily.index]
    else:
        raise ValueError(f"unknown aggregation period: {period}")
    grouped = daily.groupby(pd.Index(keys, name="period"))
    return grouped.apply(lambda r: float(np.prod(1.0 + r.to_numpy()) - 1.0))


def _row_mean(values: np.ndarray) -> np.ndarray:
    """Mean over finite entries per row; NaN where a row has none."""
    finite = np.isfinite(values)
    counts = finite.sum(axis=1)
    sums = np.where(finite, values, 0.0).sum(axis=1)
    return np.divide(
        sums, counts, out=np.full(len(counts), np.nan), where=counts > 0
    )


def assign_quantiles(factor: pd.DataFrame, n_quantiles: int) -> pd.DataFrame:
    """Per-date rank bucketing into 1..n_quantiles (1 = lowest).

    Buckets are as equal as floor(rank * n / k) allows; ties break by
    symbol order. Dates with fewer defined values than buckets stay
    entirely missing.
    """
    if n_quantiles < 2:
        raise ValueError("need at least 2 quantiles")
    values = factor.to_numpy(dtype=float)
    out = np.full_like(values, np.nan)
    col_idx = np.arange(values.shape[1])
    for i in range(values.shape[0]):
        row = values[i]
        defined = np.isfinite(row)
        k = int(defined.sum())
        if k < n_quantiles:
            continue
        cols = col_idx[defined]
        order = cols[np.lexsort((cols, row[defined]))]
        out[i, order] = (np.arange(k) * n_quantiles) // k + 1
    return pd.DataFrame(out, index=factor.index, columns=factor.columns)


@dataclass
class QuantileReport:
    quantiles: pd.DataFrame
    mean_returns: pd.DataFrame
    cumulative: pd.DataFrame
    factor_weighted: pd.Series
    top_minus_bottom: pd.Series
    distributions: pd.DataFrame


def quantile_report(
    factor: pd.DataFrame,
    close: pd.DataFrame,
    n_quantiles: int = 3,
    horizons: tuple[int, ...] = (1, 5, 22),
    smoothing: int = 22,
) -> QuantileReport:
    """Forward-return behaviour of a factor, bucketed by daily rank.

    Emits per-quantile mean forward returns at each horizon, compounded
    equal-weight return series per quantile, a demeaned factor-weighted
    unit-gross long-short series, the smoothed top-minus-bottom daily
    spread, and pooled return percentiles per bucket.
    """
    if not factor.index.equals(close.index) or not factor.columns.equals(
        close.columns
    ):
        raise ValueError("factor and close panels must be aligned")
    if not horizons or any(h < 1 for h in horizons):
        raise ValueError("horizons must be positive")
    quantiles = assign_quantiles(factor, n_quantiles)
    q_arr = quantiles.to_numpy()
    fwd = {h: (close.shift(-h) / close - 1.0).to_numpy() for h in horizons}

    mean_rows, dist_rows = [], []
    for q in range(1, n_quantiles + 1):
        mask = q_arr == q
        means = {}
        for h in horizons:
            pooled = fwd[h][mask]
            pooled = pooled[np.isfinite(pooled)]
            means[h] = float(pooled.mean()) if len(pooled) else np.nan
            row = {
                "quantile": q,
                "horizon": h,
                "count": len(pooled),
                "mean": means[h],
                "std": float(pooled.std(ddof=1)) if len(pooled) > 1 else np.nan,
            }
            for p in PERCENTILES:
                row[f"p{p:02d}"] = (
                    float(np.percentile(pooled, p)) if len(pooled) else np.nan
                )
            dist_rows.append(row)
        mean_rows.append(means)
    mean_returns = pd.DataFrame(
        mean_rows, index=pd.Index(range(1, n_quantiles + 1), name="quantile")
    )
    distributions = pd.DataFrame(dist_rows)

    fwd1 = fwd[1] if 1 in fwd else (close.shift(-1) / close - 1.0).to_numpy()
    legs = {}
    for q in range(1, n_quantiles + 1):
        cells = np.where(q_arr == q, fwd1, np.nan)
        legs[q] = _row_mean(cells)
    cumulative = pd.DataFrame(
        {
            f"q{q}": np.cumprod(1.0 + np.nan_to_num(legs[q])) - 1.0
            for q in range(1, n_quantiles + 1)
        },
        index=factor.index,
    )

    f_arr = factor.to_numpy(dtype=float)
    defined = np.isfinite(f_arr)
    row_mean = _row_mean(f_arr)
    weights = np.where(defined, f_arr - row_mean[:, None], 0.0)
    gross = np.abs(weights).sum(axis=1)
    weights = np.divide(
        weights, gross[:, None], out=np.zeros_like(weights), where=gross[:, None] > 0
    )
    fw_daily = np.nansum(np.where(np.isfinite(fwd1), weights * fwd1, 0.0), axis=1)
    factor_weighted = pd.Series(
        np.cumprod(1.0 + fw_daily) - 1.0, index=factor.index, name="factor_weighted"
    )

    spread = pd.Series(
        legs[n_quantiles] - legs[1], index=factor.index, name="top_minus_bottom"
    )
    top_minus_bottom = spread.rolling(smoothing, min_periods=1).mean()

    return QuantileReport(
        quantiles=quantiles,
        mean_returns=mean_returns,
        cumulative=cumulative,
        factor_weighted=factor_weighted,
        top_minus_bottom=top_minus_bottom,
        distributions=distributions,
    )


@dataclass
class TearSheet:
    total_return_pct: float
    common_return_pct: float
    specific_return_pct: float
    sharpe: float | None
    max_drawdown_pct: float
    annualized_volatility: float
    daily_volatility: float
    portfolio_beta: float
    daily_returns: pd.Series
    weekly_returns: pd.Series
    monthly_returns: pd.Series
    rolling_beta: pd.Series
    long_short_ratio: pd.Series
    holdings: pd.Series
    gross_leverage: pd.Series


def build_tearsheet(
    equity: pd.Series,
    benchmark_returns: pd.Series,
    holdings: pd.Series,
    gross_leverage: pd.Series,
    long_value: pd.Series,
    short_value: pd.Series,
    rolling_window: int = 126,
) -> TearSheet:
    equity = equity.astype(float)
    daily = equity.pct_change().dropna()
    bench = benchmark_returns.reindex(daily.index).fillna(0.0)
    decomp = beta_decomposition(daily, bench, rolling_window=rolling_window)
    total = float(equity.iloc[-1] / equity.iloc[0] - 1.0)
    short_abs = short_value.abs()
    ratio = long_value / short_abs.where(short_abs > 0)
    return TearSheet(
        total_return_pct=100.0 * total,
        common_return_pct=100.0 * float(decomp.cum_common.iloc[-1]),
        specific_return_pct=100.0 * float(decomp.cum_specific.iloc[-1]),
        sharpe=sharpe(daily) if len(daily) >= 2 else None,
        max_drawdown_pct=100.0 * max_drawdown(equity),
        annualized_volatility=float(daily.std(ddof=1) * np.sqrt(252)),
        daily_volatility=float(daily.std(ddof=1)),
        portfolio_beta=decomp.beta,
        daily_returns=daily,
        weekly_returns=aggregate_returns(daily, "weekly"),
        monthly_returns=aggregate_returns(daily, "monthly"),
        rolling_beta=decomp.rolling_beta,
        long_short_ratio=ratio,
        holdings=holdings.astype(float),
        gross_leverage=gross_leverage.astype(float),
    )


_SERIES_FILES = {
    "daily_returns": "daily_returns.csv",
    "weekly_returns": "weekly_returns.csv",
    "monthly_returns": "monthly_returns.csv",
    "rolling_beta": "rolling_beta.csv",
    "long_short_ratio": "long_short_ratio.csv",
    "holdings": "holdings.csv",
    "gross_leverage": "gross_leverage.csv",
}


def write_tearsheet(tearsheet: TearSheet, out_dir) -> Path:
    """Persist scalars to tearsheet.json and each series to its own CSV.

    Output is byte-deterministic: sorted keys, no timestamps.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for attr, filename in _SERIES_FILES.items():
        series = getattr(tearsheet, attr)
        frame = series.rename("value").rename_axis("date").reset_index()
        if isinstance(series.index, pd.DatetimeIndex):
            frame["date"] = frame["date"].dt.strftime("%Y-%m-%d")
        frame.to_csv(out_dir / filename, index=False)
    payload = {
        "total_return_pct": tearsheet.total_return_pct,
        "common_return_pct": tearsheet.common_return_pct,
        "specific_return_pct": tearsheet.specific_return_pct,
        "sharpe": tearsheet.sharpe,
        "max_drawdown_pct": tearsheet.max_drawdown_pct,
        "annualized_volatility": tearsheet.annualized_volatility,
        "daily_volatility": tearsheet.daily_volatility,
        "portfolio_beta": tearsheet.portfolio_beta,
        "series_files": dict(_SERIES_FILES),
    }
    path = out_dir / "tearsheet.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def write_quantile_report(report: QuantileReport, out_dir) -> Path:
    """Persist the quantile diagnostics as plot-ready CSVs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    long = report.mean_returns.reset_index().melt(
        id_vars="quantile", var_name="horizon", value_name="mean_return"
    )
    long = long.sort_values(["quantile", "horizon"]).reset_index(drop=True)
    path = out_dir / "quantile_mean_returns.csv"
    long.to_csv(path, index=False)

    cum = report.cumulative.copy()
    cum.insert(0, "date", cum.index.strftime("%Y-%m-%d"))
    cum.to_csv(out_dir / "cumulative_by_quantile.csv", index=False)

    fw = report.factor_weighted.rename("cumulative_return").rename_axis("date")
    fw = fw.reset_index()
    fw["date"] = fw["date"].dt.strftime("%Y-%m-%d")
    fw.to_csv(out_dir / "factor_weighted_cumulative.csv", index=False)

    tmb = report.top_minus_bottom.rename("smoothed_spread").rename_axis("date")
    tmb = tmb.reset_index()
    tmb["date"] = tmb["date"].dt.strftime("%Y-%m-%d")
    tmb.to_csv(out_dir / "top_minus_bottom_smoothed.csv", index=False)

    report.distributions.to_csv(out_dir / "quantile_distributions.csv", index=False)
    return path
