"""Per-series technical indicators.

Every function takes 1-D float64 arrays and returns arrays of the same
length, NaN-padded wherever the value is not yet defined. Recursive
indicators restart at data gaps; windowed indicators require the full
window to be observed, so a window crossing a gap is missing.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
import pandas as pd


def _as_float(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


def _segments(valid: np.ndarray):
    """Yield (start, stop) half-open runs of consecutive True."""
    idx = np.flatnonzero(np.diff(np.r_[0, valid.astype(np.int8), 0]))
    for start, stop in zip(idx[::2], idx[1::2]):
        yield int(start), int(stop)


def _rolling(x: np.ndarray, window: int, how: str) -> np.ndarray:
    s = pd.Series(x).rolling(window, min_periods=window)
    return getattr(s, how)().to_numpy()


def _run_length(finite: np.ndarray) -> np.ndarray:
    """Number of consecutive finite values ending at each position."""
    pos = np.arange(len(finite))
    last_bad = np.maximum.accumulate(np.where(~finite, pos, -1))
    return pos - last_bad


def ema(x, n: int) -> np.ndarray:
    """Exponential moving average, alpha = 2/(n+1), seeded with the
    simple mean of the first n observations of each contiguous run."""
    if n <= 0:
        raise ValueError("n must be positive")
    x = _as_float(x)
    out = np.full_like(x, np.nan)
    alpha = 2.0 / (n + 1.0)
    for start, stop in _segments(np.isfinite(x)):
        if stop - start < n:
            continue
        prev = x[start : start + n].mean()
        out[start + n - 1] = prev
        for t in range(start + n, stop):
            prev += alpha * (x[t] - prev)
            out[t] = prev
    return out


def _true_range(high, low, close, first_bar_hl: bool) -> np.ndarray:
    """TR_t = max(H-L, |H-C_prev|, |L-C_prev|); the first bar of a run
    has no previous close and falls back to H-L when first_bar_hl."""
    prev_close = np.r_[np.nan, close[:-1]]
    tr = np.maximum(
        high - low,
        np.maximum(np.abs(high - prev_close), np.abs(low - prev_close)),
    )
    if first_bar_hl:
        no_prev = ~np.isfinite(prev_close) & np.isfinite(high) & np.isfinite(low)
        tr[no_prev] = (high - low)[no_prev]
    return tr


def atr(high, low, close, n: int = 14) -> np.ndarray:
    """Average true range: n-period simple mean of the true range."""
    if n <= 0:
        raise ValueError("n must be positive")
    high, low, close = map(_as_float, (high, low, close))
    valid = np.isfinite(high) & np.isfinite(low) & np.isfinite(close)
    h = np.where(valid, high, np.nan)
    l = np.where(valid, low, np.nan)
    c = np.where(valid, close, np.nan)
    out = np.full_like(h, np.nan)
    for start, stop in _segments(valid):
        seg = slice(start, stop)
        tr = _true_range(h[seg], l[seg], c[seg], first_bar_hl=True)
        out[seg] = _rolling(tr, n, "mean")
    return out


class ADXResult(NamedTuple):
    di_plus: np.ndarray
    di_minus: np.ndarray
    dx: np.ndarray
    adx: np.ndarray


def adx(high, low, close, n: int = 14) -> ADXResult:
    """Directional movement system.

    +DM/-DM compare up-move H_t - H_{t-1} against down-move L_{t-1} - L_t;
    only the larger one registers, and only if positive. DM and TR are
    Wilder-smoothed over n, DI = 100 * smoothed DM / smoothed TR,
    DX = 100 * |DI+ - DI-| / (DI+ + DI-), and ADX is the Wilder recursion
    over DX seeded with the mean of its first n values.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    high, low, close = map(_as_float, (high, low, close))
    valid = np.isfinite(high) & np.isfinite(low) & np.isfinite(close)
    size = len(high)
    dip = np.full(size, np.nan)
    din = np.full(size, np.nan)
    dx = np.full(size, np.nan)
    adx_ = np.full(size, np.nan)

    for start, stop in _segments(valid):
        m = stop - start
        if m < n + 1:
            continue
        h, l, c = high[start:stop], low[start:stop], close[start:stop]
        up = h[1:] - h[:-1]
        dn = l[:-1] - l[1:]
        pdm = np.where((up > dn) & (up > 0), up, 0.0)
        ndm = np.where((dn > up) & (dn > 0), dn, 0.0)
        tr = np.maximum(
            h[1:] - l[1:],
            np.maximum(np.abs(h[1:] - c[:-1]), np.abs(l[1:] - c[:-1])),
        )

        def wilder(v: np.ndarray) -> np.ndarray:
            s = np.full(m - 1, np.nan)
            acc = v[:n].sum()
            s[n - 1] = acc
            for t in range(n, m - 1):
                acc = acc - acc / n + v[t]
                s[t] = acc
            return s

        s_pdm, s_ndm, s_tr = wilder(pdm), wilder(ndm), wilder(tr)
        with np.errstate(invalid="ignore", divide="ignore"):
            di_p = np.where(s_tr > 0, 100.0 * s_pdm / s_tr, 0.0)
            di_n = np.where(s_tr > 0, 100.0 * s_ndm / s_tr, 0.0)
            tot = di_p + di_n
            d = np.where(tot > 0, 100.0 * np.abs(di_p - di_n) / tot, 0.0)
        di_p[: n - 1] = np.nan
        di_n[: n - 1] = np.nan
        d[: n - 1] = np.nan
        dip[start + 1 : stop] = di_p
        din[start + 1 : stop] = di_n
        dx[start + 1 : stop] = d

        if m >= 2 * n:
            a = np.full(m - 1, np.nan)
            prev = d[n - 1 : 2 * n - 1].mean()
            a[2 * n - 2] = prev
            for t in range(2 * n - 1, m - 1):
                prev = (prev * (n - 1) + d[t]) / n
                a[t] = prev
            adx_[start + 1 : stop] = a
    return ADXResult(dip, din, dx, adx_)


class OscillatorResult(NamedTuple):
    apo: np.ndarray
    ppo: np.ndarray
    macd: np.ndarray
    macd_signal: np.ndarray


def apo_ppo_macd(
    close, fast: int = 12, slow: int = 26, signal: int = 9
) -> OscillatorResult:
    """Price oscillator family off two EMAs.

    APO and MACD are both fast EMA - slow EMA; PPO rescales that spread
    by the slow EMA (x100); the signal line is the signal-period EMA of
    the MACD line.
    """
    if not 0 < fast < slow:
        raise ValueError("need 0 < fast < slow")
    close = _as_float(close)
    f = ema(close, fast)
    s = ema(close, slow)
    spread = f - s
    with np.errstate(invalid="ignore", divide="ignore"):
        ppo = np.where(s != 0, 100.0 * spread / s, np.nan)
    return OscillatorResult(spread, ppo, spread, ema(spread, signal))


def cmo(close, n: int = 14) -> np.ndarray:
    """Chande momentum: 100 * (sum up-moves - sum down-moves) / total
    over the last n one-day changes; 0 on a flat window."""
    if n <= 0:
        raise ValueError("n must be positive")
    close = _as_float(close)
    dc = np.r_[np.nan, np.diff(close)]
    s_up = _rolling(np.maximum(dc, 0.0), n, "sum")
    s_dn = _rolling(np.maximum(-dc, 0.0), n, "sum")
    tot = s_up + s_dn
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(tot > 0, 100.0 * (s_up - s_dn) / tot, 0.0)
    out[~np.isfinite(tot)] = np.nan
    return out


def williams_r(high, low, close, n: int = 10) -> np.ndarray:
    """Williams %R = -100 * (HH - C) / (HH - LL) over the last n bars,
    in [-100, 0]; 0 when the window has zero range."""
    if n <= 0:
        raise ValueError("n must be positive")
    high, low, close = map(_as_float, (high, low, close))
    valid = np.isfinite(high) & np.isfinite(low) & np.isfinite(close)
    h = np.where(valid, high, np.nan)
    l = np.where(valid, low, np.nan)
    hh = _rolling(h, n, "max")
    ll = _rolling(l, n, "min")
    rng = hh - ll
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(rng > 0, -100.0 * (hh - close) / rng, 0.0)
    out[~np.isfinite(rng) | ~valid] = np.nan
    return out


def mfi(high, low, close, volume, n: int = 14) -> np.ndarray:
    """Money flow index over typical-price flows.

    Raw flow is typical price (H+L+C)/3 times volume, counted positive or
    negative by the sign of the typical-price change (flat changes are
    ignored). MFI = 100 * pos / (pos + neg) over the last n flows, with
    100 when negative flow is zero, 0 when positive flow is zero, and 50
    when the window had no directional flow at all.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    high, low, close, volume = map(_as_float, (high, low, close, volume))
    valid = (
        np.isfinite(high) & np.isfinite(low) & np.isfinite(close) & np.isfinite(volume)
    )
    tp = np.where(valid, (high + low + close) / 3.0, np.nan)
    vol = np.where(valid, volume, np.nan)
    dtp = np.r_[np.nan, np.diff(tp)]
    rmf = tp * vol
    pos = np.where(dtp > 0, rmf, np.where(np.isfinite(dtp), 0.0, np.nan))
    neg = np.where(dtp < 0, rmf, np.where(np.isfinite(dtp), 0.0, np.nan))
    s_pos = _rolling(pos, n, "sum")
    s_neg = _rolling(neg, n, "sum")
    tot = s_pos + s_neg
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(tot > 0, 100.0 * s_pos / tot, 50.0)
    out[~np.isfinite(tot)] = np.nan
    return out


def _money_flow_contribution(high, low, close, volume) -> np.ndarray:
    rng = high - low
    with np.errstate(invalid="ignore", divide="ignore"):
        mult = np.where(rng > 0, ((close - low) - (high - close)) / rng, 0.0)
    mult[~np.isfinite(rng)] = np.nan
    return mult * volume


def accumulation_distribution(high, low, close, volume) -> np.ndarray:
    """A/D line: running sum of ((C-L)-(H-C))/(H-L) * V per contiguous
    run; bars with H == L contribute zero."""
    high, low, close, volume = map(_as_float, (high, low, close, volume))
    cmfv = _money_flow_contribution(high, low, close, volume)
    out = np.full_like(cmfv, np.nan)
    for start, stop in _segments(np.isfinite(cmfv)):
        out[start:stop] = np.cumsum(cmfv[start:stop])
    return out


def money_flow_volume(high, low, close, volume, window: int = 22) -> np.ndarray:
    """Rolling sum of the per-bar money-flow contribution."""
    if window <= 0:
        raise ValueError("window must be positive")
    high, low, close, volume = map(_as_float, (high, low, close, volume))
    cmfv = _money_flow_contribution(high, low, close, volume)
    return _rolling(cmfv, window, "sum")


def rolling_beta(asset_returns, market_returns, n: int = 63) -> np.ndarray:
    """Slope of asset on market returns over a trailing window:
    cov / var; missing when market variance is zero."""
    if n <= 1:
        raise ValueError("n must exceed 1")
    a = pd.Series(_as_float(asset_returns))
    m = pd.Series(_as_float(market_returns))
    joint = a.notna() & m.notna()
    a = a.where(joint)
    m = m.where(joint)
    cov = a.rolling(n, min_periods=n).cov(m)
    var = m.rolling(n, min_periods=n).var()
    out = (cov / var).to_numpy()
    out[(var == 0).to_numpy()] = np.nan
    return out


def medprice(high, low) -> np.ndarray:
    """Median price (H+L)/2."""
    return (_as_float(high) + _as_float(low)) / 2.0


def rate_of_return(close, window: int) -> np.ndarray:
    """Trailing return (P_t - P_{t-w}) / P_{t-w} * 100 over a fully
    observed window."""
    if window <= 0:
        raise ValueError("window must be positive")
    close = _as_float(close)
    if len(close) <= window:
        return np.full_like(close, np.nan)
    prev = np.r_[np.full(window, np.nan), close[:-window]]
    with np.errstate(invalid="ignore", divide="ignore"):
        out = (close - prev) / prev * 100.0
    out[_run_length(np.isfinite(close)) < window + 1] = np.nan
    return out


def long_horizon_return(close, offset: int = 215) -> np.ndarray:
    """Roughly nine-month momentum, (P_t - P_{t-offset}) / P_t * 100.

    The current price is the denominator, so the value is bounded above
    by 100 and unbounded below.
    """
    if offset <= 0:
        raise ValueError("offset must be positive")
    close = _as_float(close)
    if len(close) <= offset:
        return np.full_like(close, np.nan)
    prev = np.r_[np.full(offset, np.nan), close[:-offset]]
    with np.errstate(invalid="ignore", divide="ignore"):
        out = (close - prev) / close * 100.0
    out[_run_length(np.isfinite(close)) < offset + 1] = np.nan
    return out


def trendline(close, window: int = 21) -> np.ndarray:
    """Least-squares slope of price against bar index over the window."""
    if window <= 1:
        raise ValueError("window must exceed 1")
    close = _as_float(close)
    n = len(close)
    out = np.full(n, np.nan)
    if n < window:
        return out
    t = np.arange(window, dtype=float)
    t_bar = t.mean()
    denom = ((t - t_bar) ** 2).sum()
    weights = (t - t_bar) / denom
    windows = np.lib.stride_tricks.sliding_window_view(close, window)
    out[window - 1 :] = windows @ weights
    return out


def rolling_sum(x, window: int) -> np.ndarray:
    """Plain rolling sum over a fully observed window."""
    if window <= 0:
        raise ValueError("window must be positive")
    return _rolling(_as_float(x), window, "sum")
