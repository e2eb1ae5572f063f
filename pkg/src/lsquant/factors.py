"""Factor registry and panel-level factor computation.

Factors map a MarketData bundle to one date-by-symbol panel each. The
registry fixes the canonical factor ordering used everywhere downstream:
training matrices list columns in registry order and score ties resolve
in registry order. Fundamental inputs join as-of: a bar sees the latest
statement row dated on or before it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import pandas as pd

from . import indicators as ind
from .market_data import MarketData
from .panels import to_long, from_long


def _safe_div(a: pd.DataFrame, b: pd.DataFrame) -> pd.DataFrame:
    out = a / b
    return out.where(b != 0)


class FactorContext:
    """Caches shared intermediates (as-of panels, oscillator runs)."""

    def __init__(self, data: MarketData):
        self.data = data
        self._asof: dict[str, pd.DataFrame] = {}
        self._cache: dict[tuple, object] = {}

    @property
    def close(self) -> pd.DataFrame:
        return self.data.close

    def returns(self) -> pd.DataFrame:
        key = ("returns",)
        if key not in self._cache:
            self._cache[key] = self.data.close.pct_change(fill_method=None)
        return self._cache[key]

    def benchmark_returns(self) -> pd.Series:
        key = ("benchmark",)
        if key not in self._cache:
            self._cache[key] = self.returns().mean(axis=1)
        return self._cache[key]

    def asof_field(self, name: str) -> pd.DataFrame:
        """Panel of the latest fundamentals value with date <= bar date."""
        if name not in self._asof:
            dates = self.data.dates
            symbols = self.data.symbols
            f = self.data.fundamentals
            if f is None or f.empty:
                panel = pd.DataFrame(np.nan, index=dates, columns=symbols)
            else:
                rows = f[f["field"] == name]
                if rows.empty:
                    panel = pd.DataFrame(np.nan, index=dates, columns=symbols)
                else:
                    wide = rows.pivot_table(
                        index="date", columns="symbol", values="value", aggfunc="last"
                    )
                    union = wide.index.union(dates)
                    panel = (
                        wide.reindex(union).ffill().reindex(dates)
                        .reindex(columns=symbols)
                    )
            self._asof[name] = panel.astype(float)
        return self._asof[name]

    def apply_series(self, fn: Callable, *panels: pd.DataFrame, **kw) -> pd.DataFrame:
        base = panels[0]
        out = {}
        for col in base.columns:
            out[col] = fn(*(p[col].to_numpy() for p in panels), **kw)
        return pd.DataFrame(out, index=base.index, columns=base.columns)

    def adx_bundle(self, n: int) -> dict[str, pd.DataFrame]:
        key = ("adx", n)
        if key not in self._cache:
            d = self.data
            parts = {k: {} for k in ("di_plus", "di_minus", "dx", "adx")}
            for col in d.close.columns:
                res = ind.adx(
                    d.high[col].to_numpy(),
                    d.low[col].to_numpy(),
                    d.close[col].to_numpy(),
                    n,
                )
                for k in parts:
                    parts[k][col] = getattr(res, k)
            self._cache[key] = {
                k: pd.DataFrame(v, index=d.dates, columns=d.close.columns)
                for k, v in parts.items()
            }
        return self._cache[key]

    def oscillator_bundle(self, fast: int, slow: int, signal: int) -> dict:
        key = ("osc", fast, slow, signal)
        if key not in self._cache:
            d = self.data
            parts = {k: {} for k in ("apo", "ppo", "macd", "macd_signal")}
            for col in d.close.columns:
                res = ind.apo_ppo_macd(d.close[col].to_numpy(), fast, slow, signal)
                for k in parts:
                    parts[k][col] = getattr(res, k)
            self._cache[key] = {
                k: pd.DataFrame(v, index=d.dates, columns=d.close.columns)
                for k, v in parts.items()
            }
        return self._cache[key]


@dataclass
class FactorSpec:
    name: str
    fn: Callable[[FactorContext], pd.DataFrame]
    params: dict = field(default_factory=dict)
    inputs: tuple = ()
    description: str = ""


def _f_adx(ctx, n=14):
    return ctx.adx_bundle(n)["adx"]


def _f_dx(ctx, n=14):
    return ctx.adx_bundle(n)["dx"]


def _f_apo(ctx, fast=12, slow=26, signal=9):
    return ctx.oscillator_bundle(fast, slow, signal)["apo"]


def _f_ppo(ctx, fast=12, slow=26, signal=9):
    return ctx.oscillator_bundle(fast, slow, signal)["ppo"]


def _f_macd(ctx, fast=12, slow=26, signal=9):
    return ctx.oscillator_bundle(fast, slow, signal)["macd"]


def _f_macd_signal(ctx, fast=12, slow=26, signal=9):
    return ctx.oscillator_bundle(fast, slow, signal)["macd_signal"]


def _f_atr(ctx, n=14):
    d = ctx.data
    return ctx.apply_series(ind.atr, d.high, d.low, d.close, n=n)


def _f_ad_line(ctx):
    d = ctx.data
    return ctx.apply_series(
        ind.accumulation_distribution, d.high, d.low, d.close, d.volume
    )


def _f_money_flow_volume(ctx, window=22):
    d = ctx.data
    return ctx.apply_series(
        ind.money_flow_volume, d.high, d.low, d.close, d.volume, window=window
    )


def _f_mfi(ctx, n=14):
    d = ctx.data
    return ctx.apply_series(ind.mfi, d.high, d.low, d.close, d.volume, n=n)


def _f_cmo(ctx, n=14):
    return ctx.apply_series(ind.cmo, ctx.close, n=n)


def _f_williams_r(ctx, n=10):
    d = ctx.data
    return ctx.apply_series(ind.williams_r, d.high, d.low, d.close, n=n)


def _f_beta(ctx, n=63):
    rets = ctx.returns()
    bench = ctx.benchmark_returns().to_numpy()
    out = {}
    for col in rets.columns:
        out[col] = ind.rolling_beta(rets[col].to_numpy(), bench, n)
    return pd.DataFrame(out, index=rets.index, columns=rets.columns)


def _f_medprice(ctx):
    return (ctx.data.high + ctx.data.low) / 2.0


def _f_rate_of_return(ctx, window=5):
    return ctx.apply_series(ind.rate_of_return, ctx.close, window=window)


def _f_mean_reversion_1m(ctx, window=21):
    trailing = ctx.apply_series(ind.rate_of_return, ctx.close, window=window)
    return standardize_cross_section(trailing, winsor=(0.0, 0.0))


def _f_long_horizon_return(ctx, offset=215):
    return ctx.apply_series(ind.long_horizon_return, ctx.close, offset=offset)


def _f_trendline(ctx, window=21):
    return ctx.apply_series(ind.trendline, ctx.close, window=window)


def _f_volume_22d(ctx, window=22):
    return ctx.apply_series(ind.rolling_sum, ctx.data.volume, window=window)


def _f_asset_to_equity(ctx):
    return _safe_div(
        ctx.asof_field("total_assets"), ctx.asof_field("shareholders_equity")
    )


def _f_capex_to_cashflow(ctx):
    return _safe_div(
        ctx.asof_field("operating_cash_flow"), ctx.asof_field("capital_expenditure")
    )


def _f_asset_growth_3m(ctx, window=63):
    assets = ctx.asof_field("total_assets")
    prior = assets.shift(window)
    return _safe_div(assets - prior, prior) * 100.0


def _ebit(ctx) -> pd.DataFrame:
    return (
        ctx.asof_field("revenue")
        - ctx.asof_field("cogs")
        - ctx.asof_field("operating_expenses")
    )


def _f_ebit_to_assets(ctx):
    return _safe_div(_ebit(ctx), ctx.asof_field("total_assets"))


def _f_ebitda_yield(ctx):
    market_value = ctx.close * ctx.asof_field("shares_outstanding")
    return _safe_div(ctx.asof_field("ebitda"), market_value)


def _f_roic(ctx):
    return _safe_div(ctx.asof_field("nopat"), ctx.asof_field("invested_capital"))


def _f_ocf_to_assets(ctx):
    return _safe_div(
        ctx.asof_field("operating_cash_flow"), ctx.asof_field("total_assets")
    )


def _f_operating_ratio(ctx):
    return _safe_div(
        ctx.asof_field("operating_expenses") + ctx.asof_field("cogs"),
        ctx.asof_field("revenue"),
    )


def _f_earnings_quality(ctx):
    return _safe_div(
        ctx.asof_field("operating_cash_flow"), ctx.asof_field("net_income")
    )


_PRICE = ("high", "low", "close")
_PV = ("high", "low", "close", "volume")


def default_registry() -> dict[str, FactorSpec]:
    """The canonical factor set, in canonical order."""
    specs = [
        FactorSpec("adx", _f_adx, {"n": 14}, _PRICE, "average directional index"),
        FactorSpec("dx", _f_dx, {"n": 14}, _PRICE, "directional movement index"),
        FactorSpec("apo", _f_apo, {"fast": 12, "slow": 26}, ("close",),
                    "absolute price oscillator"),
        FactorSpec("ppo", _f_ppo, {"fast": 12, "slow": 26}, ("close",),
                    "percentage price oscillator"),
        FactorSpec("macd", _f_macd, {"fast": 12, "slow": 26}, ("close",),
                    "moving average convergence divergence line"),
        FactorSpec("macd_signal", _f_macd_signal,
                    {"fast": 12, "slow": 26, "signal": 9}, ("close",),
                    "signal-period EMA of the MACD line"),
        FactorSpec("atr", _f_atr, {"n": 14}, _PRICE, "average true range"),
        FactorSpec("ad_line", _f_ad_line, {}, _PV, "accumulation/distribution line"),
        FactorSpec("money_flow_volume", _f_money_flow_volume, {"window": 22}, _PV,
                    "rolling sum of signed money flow"),
        FactorSpec("mfi", _f_mfi, {"n": 14}, _PV, "money flow index"),
        FactorSpec("cmo", _f_cmo, {"n": 14}, ("close",), "Chande momentum oscillator"),
        FactorSpec("williams_r", _f_williams_r, {"n": 10}, _PRICE, "Williams %R"),
        FactorSpec("beta", _f_beta, {"n": 63}, ("close",),
                    "rolling beta to the equal-weight market"),
        FactorSpec("medprice", _f_medprice, {}, ("high", "low"), "median price"),
        FactorSpec("rate_of_return", _f_rate_of_return, {"window": 5}, ("close",),
                    "trailing one-week return"),
        FactorSpec("mean_reversion_1m", _f_mean_reversion_1m, {"window": 21},
                    ("close",), "cross-sectional z of trailing one-month return"),
        FactorSpec("long_horizon_return", _f_long_horizon_return, {"offset": 215},
                    ("close",), "momentum over roughly nine months"),
        FactorSpec("trendline", _f_trendline, {"window": 21}, ("close",),
                    "least-squares price slope"),
        FactorSpec("volume_22d", _f_volume_22d, {"window": 22}, ("volume",),
                    "one-month traded volume"),
        FactorSpec("asset_to_equity", _f_asset_to_equity, {}, ("fundamentals",),
                    "balance-sheet leverage"),
        FactorSpec("capex_to_cashflow", _f_capex_to_cashflow, {}, ("fundamentals",),
                    "operating cash flow per unit of capex"),
        FactorSpec("asset_growth_3m", _f_asset_growth_3m, {"window": 63},
                    ("fundamentals",), "quarter-over-quarter asset growth, percent"),
        FactorSpec("ebit_to_assets", _f_ebit_to_assets, {}, ("fundamentals",),
                    "operating earnings over assets"),
        FactorSpec("ebitda_yield", _f_ebitda_yield, {}, ("close", "fundamentals"),
                    "EBITDA over market value"),
        FactorSpec("roic", _f_roic, {}, ("fundamentals",),
                    "return on invested capital"),
        FactorSpec("ocf_to_assets", _f_ocf_to_assets, {}, ("fundamentals",),
                    "operating cash flow over assets"),
        FactorSpec("operating_ratio", _f_operating_ratio, {}, ("fundamentals",),
                    "operating costs over revenue"),
        FactorSpec("earnings_quality", _f_earnings_quality, {}, ("fundamentals",),
                    "cash flow backing of reported earnings"),
    ]
    return {s.name: s for s in specs}


def compute_factors(
    data: MarketData,
    names: list[str] | None = None,
    registry: dict[str, FactorSpec] | None = None,
) -> dict[str, pd.DataFrame]:
    """Compute the requested factors (default: all) in registry order."""
    registry = registry if registry is not None else default_registry()
    if names is None:
        names = list(registry)
    unknown = [n for n in names if n not in registry]
    if unknown:
        raise KeyError(f"unknown factors: {unknown}")
    ctx = FactorContext(data)
    ordered = [n for n in registry if n in set(names)]
    return {n: registry[n].fn(ctx, **registry[n].params) for n in ordered}


def standardize_cross_section(
    panel: pd.DataFrame, winsor: tuple[float, float] = (0.01, 0.01)
) -> pd.DataFrame:
    """Winsorize then z-score each date's cross-section.

    Values are clipped to the [lower, 1-upper] quantiles of that date,
    then centered and scaled by the population standard deviation. A date
    with zero dispersion maps to all zeros; missing cells stay missing.
    """
    lo, hi = winsor
    if not (0.0 <= lo < 0.5 and 0.0 <= hi < 0.5):
        raise ValueError("winsor limits must lie in [0, 0.5)")
    values = panel.to_numpy(dtype=float, copy=True)
    with np.errstate(invalid="ignore"):
        for i in range(values.shape[0]):
            row = values[i]
            defined = np.isfinite(row)
            if not defined.any():
                continue
            vals = row[defined]
            if lo > 0 or hi > 0:
                lo_q = np.quantile(vals, lo)
                hi_q = np.quantile(vals, 1.0 - hi)
                vals = np.clip(vals, lo_q, hi_q)
            mu = vals.mean()
            sd = vals.std()
            row[defined] = (vals - mu) / sd if sd > 0 else 0.0
    return pd.DataFrame(values, index=panel.index, columns=panel.columns)


def factor_matrix_to_long(factors: dict[str, pd.DataFrame]) -> pd.DataFrame:
    """Stack factor panels into (date, symbol, factor, value) rows."""
    frames = []
    for name, panel in factors.items():
        block = to_long(panel)
        block.insert(2, "factor", name)
        frames.append(block)
    if not frames:
        return pd.DataFrame(columns=["date", "symbol", "factor", "value"])
    return pd.concat(frames, ignore_index=True)


def long_to_factor_matrix(rows: pd.DataFrame) -> dict[str, pd.DataFrame]:
    out = {}
    for name, grp in rows.groupby("factor", sort=False):
        out[name] = from_long(grp[["date", "symbol", "value"]])
    return out
