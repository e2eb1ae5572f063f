"""Seeded synthetic market with a planted cross-sectional signal.

Prices follow geometric random walks whose daily shocks mix a persistent
per-symbol latent score with idiosyncratic noise. Because the score is
persistent (AR(1), rho near 1), trailing-return factors computed from
these prices become noisy views of the score, and the score at t drives
the 5-day forward return, so a learner has something real to find.
signal_strength scales the score's share of daily volatility; 0 is a
pure null market. The latent score is also emitted so tests can price
an oracle strategy that trades it directly.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .market_data import MarketData


@dataclass
class SynthConfig:
    n_symbols: int = 100
    n_days: int = 750
    signal_strength: float = 0.5
    seed: int = 7
    start: str = "2015-01-02"
    rho: float = 0.97
    signal_scale: float = 0.25
    quarter_sessions: int = 63

    def __post_init__(self):
        if self.n_symbols < 10:
            raise ValueError("need at least 10 symbols")
        if self.n_days < 300:
            raise ValueError("need at least 300 days")
        if not 0.0 <= self.signal_strength <= 1.0:
            raise ValueError("signal_strength must be in [0, 1]")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must be in [0, 1)")


@dataclass
class SynthMarket:
    bars: pd.DataFrame
    fundamentals: pd.DataFrame
    latent: pd.DataFrame  # panel: dates x symbols, the score at t

    def to_market_data(self) -> MarketData:
        """Pivot the long bar rows into aligned panels."""
        idx = pd.DatetimeIndex(pd.to_datetime(self.bars["date"].unique()))
        panels = {}
        for field in ("open", "high", "low", "close", "volume"):
            wide = self.bars.pivot(index="date", columns="symbol", values=field)
            wide.index = pd.to_datetime(wide.index)
            wide = wide.reindex(idx).astype(float)
            wide.columns.name = None
            wide.index.name = None
            panels[field] = wide
        fund = self.fundamentals.copy()
        fund["date"] = pd.to_datetime(fund["date"])
        return MarketData(fundamentals=fund, **panels)


def generate_market(config: SynthConfig) -> SynthMarket:
    rng = np.random.default_rng(config.seed)
    n_days, n_sym = config.n_days, config.n_symbols
    dates = pd.bdate_range(config.start, periods=n_days)
    symbols = [f"S{i:04d}" for i in range(n_sym)]

    mu = rng.normal(0.0, 2e-4, n_sym)
    sigma = rng.uniform(0.010, 0.025, n_sym)
    p0 = rng.uniform(20.0, 180.0, n_sym)

    rho = config.rho
    alpha = np.empty((n_days, n_sym))
    alpha[0] = rng.standard_normal(n_sym)
    innov = rng.standard_normal((n_days - 1, n_sym)) * np.sqrt(1.0 - rho * rho)
    for t in range(1, n_days):
        alpha[t] = rho * alpha[t - 1] + innov[t - 1]

    # today's return loads on yesterday's score; total variance stays sigma^2
    w = config.signal_scale * config.signal_strength
    lagged = np.vstack([np.zeros(n_sym), alpha[:-1]])
    eta = rng.standard_normal((n_days, n_sym))
    shocks = w * lagged + np.sqrt(max(1.0 - w * w, 0.0)) * eta
    rets = np.maximum(mu + sigma * shocks, -0.5)
    close = p0 * np.cumprod(1.0 + rets, axis=0)

    prev_close = np.vstack([p0, close[:-1]])
    gaps = rng.normal(0.0, 1.0, (n_days, n_sym)) * (sigma / 3.0)
    open_ = prev_close * (1.0 + gaps)
    hi_ext = np.abs(rng.normal(0.0, 1.0, (n_days, n_sym))) * (sigma / 2.0)
    lo_ext = np.minimum(
        np.abs(rng.normal(0.0, 1.0, (n_days, n_sym))) * (sigma / 2.0), 0.2
    )
    high = np.maximum(open_, close) * (1.0 + hi_ext)
    low = np.minimum(open_, close) * (1.0 - lo_ext)

    base_volume = 10.0 ** rng.uniform(5.0, 7.0, n_sym)
    volume = np.maximum(
        np.round(base_volume * np.exp(rng.normal(0.0, 0.6, (n_days, n_sym)))), 1.0
    ).astype(np.int64)

    date_col = np.repeat(dates.strftime("%Y-%m-%d"), n_sym)
    sym_col = np.tile(symbols, n_days)
    bars = pd.DataFrame(
        {
            "date": date_col,
            "symbol": sym_col,
            "open": np.round(open_, 4).ravel(),
            "high": np.round(high, 4).ravel(),
            "low": np.round(low, 4).ravel(),
            "close": np.round(close, 4).ravel(),
            "volume": volume.ravel(),
        }
    )

    fundamentals = _fundamentals(rng, dates, symbols, p0, config.quarter_sessions)
    latent = pd.DataFrame(alpha, index=dates, columns=symbols)
    return SynthMarket(bars=bars, fundamentals=fundamentals, latent=latent)


def _fundamentals(rng, dates, symbols, p0, quarter_sessions) -> pd.DataFrame:
    n_sym = len(symbols)
    q_pos = range(0, len(dates), quarter_sessions)
    assets0 = 10.0 ** rng.uniform(8.0, 10.5, n_sym)
    growth = rng.normal(0.01, 0.01, n_sym)
    leverage = rng.uniform(0.3, 0.7, n_sym)
    turnover = rng.uniform(0.15, 0.35, n_sym)
    cogs_ratio = rng.uniform(0.40, 0.60, n_sym)
    opex_ratio = rng.uniform(0.20, 0.30, n_sym)
    market_cap = 10.0 ** rng.uniform(8.3, 10.7, n_sym)
    shares = np.round(market_cap / p0)

    rows = []
    for q_i, pos in enumerate(q_pos):
        date = dates[pos].strftime("%Y-%m-%d")
        noise = rng.lognormal(0.0, 0.05, n_sym)
        assets = assets0 * (1.0 + growth) ** q_i * noise
        liabilities = assets * leverage
        equity = assets - liabilities
        revenue = assets * turnover * rng.lognormal(0.0, 0.08, n_sym)
        cogs = revenue * cogs_ratio
        opex = revenue * opex_ratio
        ebit = revenue - cogs - opex
        depreciation = assets * 0.01
        interest = liabilities * 0.01
        taxes = np.maximum(0.21 * (ebit - interest), 0.0)
        net_income = ebit - interest - taxes
        ocf = (net_income + depreciation) * rng.uniform(0.8, 1.2, n_sym)
        values = {
            "total_assets": assets,
            "total_liabilities": liabilities,
            "shareholders_equity": equity,
            "revenue": revenue,
            "cogs": cogs,
            "operating_expenses": opex,
            "ebitda": ebit + depreciation,
            "interest": interest,
            "taxes": taxes,
            "net_income": net_income,
            "operating_cash_flow": ocf,
            "capital_expenditure": assets * rng.uniform(0.005, 0.02, n_sym),
            "nopat": ebit * 0.79,
            "invested_capital": equity + 0.5 * liabilities,
            "shares_outstanding": shares,
        }
        for field, vec in values.items():
            for i, sym in enumerate(symbols):
                rows.append((date, sym, field, round(float(vec[i]), 2)))
    out = pd.DataFrame(rows, columns=["date", "symbol", "field", "value"])
    return out.sort_values(["date", "symbol", "field"], kind="stable").reset_index(
        drop=True
    )


def write_market(market: SynthMarket, out_dir) -> dict[str, Path]:
    """Write bars/fundamentals/latent CSVs; byte-identical per config."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "bars": out_dir / "bars.csv",
        "fundamentals": out_dir / "fundamentals.csv",
        "latent": out_dir / "latent.csv",
    }
    market.bars.to_csv(paths["bars"], index=False)
    market.fundamentals.to_csv(paths["fundamentals"], index=False)
    latent_long = market.latent.rename_axis("date").reset_index().melt(
        id_vars="date", var_name="symbol", value_name="score"
    )
    latent_long["date"] = latent_long["date"].dt.strftime("%Y-%m-%d")
    latent_long = latent_long.sort_values(["date", "symbol"], kind="stable")
    latent_long.to_csv(paths["latent"], index=False)
    return paths


def read_latent(path) -> pd.DataFrame:
    """Load the emitted latent score back into a panel."""
    # round_trip parsing so the written scores come back bit-identical
    long = pd.read_csv(path, float_precision="round_trip")
    panel = long.pivot(index="date", columns="symbol", values="score")
    panel.index = pd.to_datetime(panel.index)
    panel.columns.name = None
    panel.index.name = None
    return panel.sort_index()
