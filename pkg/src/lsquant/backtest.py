"""Walk-forward long-short simulation.

At each rebalance date t the engine trains on the trailing window whose
labels are realized by t, scores the tradable universe with factor
values at t, and emits equal-dollar target positions for the top and
bottom of the conviction ranking. Orders are sized against equity at t
and filled at the next session's open with slippage and per-share
commission; shares are whole, residual cash stays uninvested. The
portfolio marks to market at every close, so the accounting identity
equity = cash + sum(shares * price) can be audited from the outputs.

Decisions at t use data at or before t only. Fill-time facts (a missing
next open) can drop an order and redistribute its leg's dollars, but
never feed back into the decision artifacts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import pandas as pd

from .dataset import (
    forward_returns,
    quantile_labels,
    stack_factor_panels,
    window_from_block,
)
from .ensemble import EnsembleSpec, fit_ensemble, make_spec, select_positions
from .errors import BankruptcyHalt, ConfigError, InsufficientHistoryError
from .factors import compute_factors, default_registry, standardize_cross_section
from .market_data import MarketData, build_universe

REBALANCE_MODES = ("daily", "weekly", "monthly")


@dataclass
class BacktestConfig:
    window: int = 200
    horizon: int = 5
    rebalance: str = "daily"
    n_long: int = 250
    n_short: int = 250
    leverage_min: float = 0.96
    leverage_max: float = 1.05
    gross_target: float = 1.0
    commission_per_share: float = 0.001
    slippage: float = 0.0005
    initial_capital: float = 10_000_000.0
    top_k: int = 15
    upper: float = 0.3
    lower: float = 0.3
    max_missing: float = 0.3
    exclude_zero_labels: bool = False
    features: tuple[str, ...] | None = None
    universe_size: int = 1500
    universe_lookback: int = 63

    def __post_init__(self):
        if self.horizon < 1 or self.window <= self.horizon:
            raise ConfigError("need window > horizon >= 1")
        if self.rebalance not in REBALANCE_MODES:
            raise ConfigError(f"rebalance must be one of {REBALANCE_MODES}")
        if self.n_long < 0 or self.n_short < 0 or self.n_long + self.n_short < 1:
            raise ConfigError("need non-negative leg sizes, at least one position")
        if not 0 < self.leverage_min <= self.leverage_max:
            raise ConfigError("need 0 < leverage_min <= leverage_max")
        if not self.leverage_min <= self.gross_target <= self.leverage_max:
            raise ConfigError("gross_target must sit inside the leverage band")
        if self.commission_per_share < 0 or not 0 <= self.slippage < 1:
            raise ConfigError("invalid trading costs")
        if self.initial_capital <= 0:
            raise ConfigError("initial_capital must be positive")
        if self.top_k < 1:
            raise ConfigError("top_k must be at least 1")
        if not 0 <= self.max_missing < 1:
            raise ConfigError("max_missing must be in [0, 1)")
        if self.universe_size < 1 or self.universe_lookback < 1:
            raise ConfigError("invalid universe settings")
        if self.features is not None:
            self.features = tuple(self.features)


def rebalance_dates(calendar: pd.DatetimeIndex, mode: str) -> pd.DatetimeIndex:
    """Sessions on which to retrain and re-target positions."""
    if len(calendar) == 0:
        raise ValueError("empty trading calendar")
    if mode == "daily":
        return calendar
    if mode == "weekly":
        iso = calendar.isocalendar()
        keys = list(zip(iso["year"], iso["week"]))
    elif mode == "monthly":
        keys = list(zip(calendar.year, calendar.month))
    else:
        raise ValueError(f"rebalance must be one of {REBALANCE_MODES}")
    take = [i for i, key in enumerate(keys) if i == 0 or key != keys[i - 1]]
    return calendar[take]


@dataclass
class PortfolioState:
    date: pd.Timestamp
    cash: float
    positions: dict[str, int] = field(default_factory=dict)
    equity: float = 0.0
    gross_leverage: float = 0.0

    @property
    def holdings(self) -> int:
        return len(self.positions)


@dataclass
class Fill:
    date: pd.Timestamp
    symbol: str
    shares: int
    price: float
    commission: float


def mark_state(state: PortfolioState, prices, date=None) -> PortfolioState:
    """Recompute equity and gross leverage at the given prices."""
    date = state.date if date is None else pd.Timestamp(date)
    long_v = short_v = 0.0
    for sym, shares in state.positions.items():
        px = float(prices[sym])
        if not (np.isfinite(px) and px > 0):
            raise ValueError(f"no usable mark price for held symbol {sym}")
        value = shares * px
        if shares > 0:
            long_v += value
        else:
            short_v += value
    equity = state.cash + long_v + short_v
    if equity <= 0:
        raise BankruptcyHalt(date.date(), equity)
    gross = (long_v - short_v) / equity
    return replace(state, date=date, equity=equity, gross_leverage=gross)


def apply_fills(state: PortfolioState, fills, prices, date=None) -> PortfolioState:
    """Settle fills against cash and positions, then mark to market.

    Raises BankruptcyHalt when the marked equity is exhausted.
    """
    cash = state.cash
    positions = dict(state.positions)
    for f in fills:
        if not f.price > 0:
            raise ValueError(f"fill price must be positive: {f}")
        if f.shares == 0:
            continue
        cash -= f.shares * f.price + f.commission
        new_shares = positions.get(f.symbol, 0) + f.shares
        if new_shares:
            positions[f.symbol] = new_shares
        else:
            positions.pop(f.symbol, None)
    moved = replace(state, cash=cash, positions=positions)
    return mark_state(moved, prices, date=date)


@dataclass
class PipelineInputs:
    """Everything the walk-forward loop needs, computed once."""

    config: BacktestConfig
    calendar: pd.DatetimeIndex
    symbols: pd.Index
    factor_names: list[str]
    block: np.ndarray  # (date, symbol, factor), cross-sectionally standardized
    labels: pd.DataFrame
    y_values: np.ndarray
    universe: np.ndarray  # bool (date, symbol)
    close: np.ndarray
    open: np.ndarray
    close_ffill: np.ndarray
    benchmark_returns: pd.Series
    score_override: np.ndarray | None = None


def prepare_inputs(
    data: MarketData,
    config: BacktestConfig,
    registry: dict | None = None,
    score_override: pd.DataFrame | None = None,
) -> PipelineInputs:
    """Compute factors, labels and the universe for a walk-forward run.

    Factors are standardized per date (cross-section only), so nothing
    here mixes information across time beyond each factor's own trailing
    window.
    """
    registry = registry if registry is not None else default_registry()
    names = list(config.features) if config.features else list(registry)
    raw = compute_factors(data, names=names, registry=registry)
    factors = {name: standardize_cross_section(panel) for name, panel in raw.items()}
    labels = quantile_labels(
        forward_returns(data.close, config.horizon), config.upper, config.lower
    )
    universe = build_universe(
        data.close * data.volume,
        n=config.universe_size,
        lookback=config.universe_lookback,
    )
    factor_names, block = stack_factor_panels(factors, labels)

    returns = data.close.pct_change(fill_method=None)
    bench = returns.where(universe).mean(axis=1).fillna(0.0)

    override_arr = None
    if score_override is not None:
        if not score_override.index.equals(labels.index) or not (
            score_override.columns.equals(labels.columns)
        ):
            raise ValueError("score_override panel is not aligned with the data")
        override_arr = score_override.to_numpy(dtype=float)

    return PipelineInputs(
        config=config,
        calendar=labels.index,
        symbols=labels.columns,
        factor_names=factor_names,
        block=block,
        labels=labels,
        y_values=labels.to_numpy(dtype=float),
        universe=universe.to_numpy(dtype=bool),
        close=data.close.to_numpy(dtype=float),
        open=data.open.to_numpy(dtype=float),
        close_ffill=data.close.ffill().to_numpy(dtype=float),
        benchmark_returns=bench,
        score_override=override_arr,
    )


@dataclass
class Decision:
    """Everything decided at t: scores, chosen legs, dollar targets."""

    asof: pd.Timestamp
    conviction: pd.Series
    orders: pd.DataFrame  # columns: symbol, side, target_dollars
    long: list[str]
    short: list[str]
    feature_ranking: list[tuple[int, str, float]]
    n_scored: int
    n_unscored: int
    clipped: bool
    window: object | None = None

    def orders_csv(self) -> str:
        return self.orders.to_csv(index=False)

    def conviction_csv(self) -> str:
        frame = self.conviction.rename("score").rename_axis("symbol").reset_index()
        return frame.to_csv(index=False)


def _effective_legs(n_long: int, n_short: int, available: int) -> tuple[int, int]:
    total = n_long + n_short
    if total <= available:
        return n_long, n_short
    return (available * n_long) // total, (available * n_short) // total


def decision_seed(root_seed: int | None, asof: pd.Timestamp) -> int:
    """Per-date seed derived from the run's root seed; independent of
    how many rebalances preceded it."""
    entropy = [0 if root_seed is None else int(root_seed), int(asof.toordinal())]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def make_decision(
    inputs: PipelineInputs,
    asof,
    equity: float,
    current_positions: dict[str, int],
    spec: EnsembleSpec,
    seed: int | None = None,
    keep_window: bool = False,
) -> Decision:
    """Train, score the universe and emit dollar targets as of one date."""
    cfg = inputs.config
    asof = pd.Timestamp(asof)
    pos = inputs.calendar.get_indexer([asof])[0]
    if pos < 0:
        raise ValueError(f"asof {asof.date()} not on the trading calendar")
    univ_mask = inputs.universe[pos]
    symbols_arr = inputs.symbols.to_numpy()

    window = None
    if inputs.score_override is not None:
        row = inputs.score_override[pos]
        eligible = univ_mask & np.isfinite(row)
        conviction = pd.Series(row[eligible], index=symbols_arr[eligible])
        ranking: list[tuple[int, str, float]] = []
        n_unscored = int(univ_mask.sum() - eligible.sum())
    else:
        window = window_from_block(
            inputs.block,
            inputs.factor_names,
            inputs.y_values,
            inputs.calendar,
            inputs.symbols,
            asof,
            window=cfg.window,
            horizon=cfg.horizon,
            max_missing=cfg.max_missing,
            exclude_zero_labels=cfg.exclude_zero_labels,
        )
        fitted = fit_ensemble(window, spec, k=cfg.top_k, seed=seed)
        sel_cols = [inputs.factor_names.index(n) for n in fitted.feature_names]
        X_t = inputs.block[pos][:, sel_cols]
        eligible = univ_mask & np.all(np.isfinite(X_t), axis=1)
        n_unscored = int(univ_mask.sum() - eligible.sum())
        if not eligible.any():
            raise InsufficientHistoryError(f"no scorable symbols at {asof.date()}")
        scores = fitted.conviction(np.ascontiguousarray(X_t[eligible]))
        conviction = pd.Series(scores, index=symbols_arr[eligible])
        ranking = fitted.selection.ranking
    if conviction.empty:
        raise InsufficientHistoryError(f"no scorable symbols at {asof.date()}")

    n_long, n_short = _effective_legs(cfg.n_long, cfg.n_short, len(conviction))
    picks = select_positions(conviction, n_long, n_short)
    leg_dollars = equity * cfg.gross_target / 2.0

    rows = []
    for sym in picks.long:
        rows.append((sym, "long", leg_dollars / len(picks.long)))
    for sym in picks.short:
        rows.append((sym, "short", leg_dollars / len(picks.short)))
    chosen = set(picks.long) | set(picks.short)
    for sym in current_positions:
        if sym not in chosen:
            rows.append((sym, "exit", 0.0))
    orders = pd.DataFrame(rows, columns=["symbol", "side", "target_dollars"])
    orders = orders.sort_values("symbol", kind="stable").reset_index(drop=True)

    return Decision(
        asof=asof,
        conviction=conviction,
        orders=orders,
        long=picks.long,
        short=picks.short,
        feature_ranking=ranking,
        n_scored=len(conviction),
        n_unscored=n_unscored,
        clipped=(n_long, n_short) != (cfg.n_long, cfg.n_short),
        window=window if keep_window else None,
    )


def _execute_orders(
    decision: Decision,
    open_row: np.ndarray,
    col_of: dict[str, int],
    current_positions: dict[str, int],
    cfg: BacktestConfig,
    date: pd.Timestamp,
) -> tuple[list[Fill], dict]:
    """Turn dollar targets into whole-share fills at today's open.

    Symbols without an open price are skipped; their leg's dollars are
    re-spread over the leg's fillable symbols so deployment stays on
    target. Unfillable exits stay in the book and are counted.
    """

    def open_px(sym: str) -> float:
        px = open_row[col_of[sym]]
        return float(px) if np.isfinite(px) and px > 0 else np.nan

    diag = {"unfillable": 0, "skipped_exits": 0, "fully_filled": True}
    targets: dict[str, int] = {}
    for side, sign in (("long", 1), ("short", -1)):
        leg = decision.orders[decision.orders["side"] == side]
        if leg.empty:
            continue
        leg_dollars = float(leg["target_dollars"].sum())
        fillable = [s for s in leg["symbol"] if not math.isnan(open_px(s))]
        dropped = len(leg) - len(fillable)
        if dropped:
            diag["unfillable"] += dropped
            diag["fully_filled"] = False
        if not fillable:
            continue
        per_symbol = leg_dollars / len(fillable)
        for sym in fillable:
            targets[sym] = sign * int(per_symbol // open_px(sym))
    for sym in decision.orders.loc[
        decision.orders["side"] == "exit", "symbol"
    ]:
        if math.isnan(open_px(sym)):
            diag["skipped_exits"] += 1
            diag["fully_filled"] = False
        else:
            targets[sym] = 0

    fills = []
    for sym in sorted(targets):
        delta = targets[sym] - current_positions.get(sym, 0)
        if delta == 0:
            continue
        px = open_px(sym)
        exec_px = px * (1.0 + cfg.slippage) if delta > 0 else px * (1.0 - cfg.slippage)
        fills.append(
            Fill(
                date=date,
                symbol=sym,
                shares=delta,
                price=exec_px,
                commission=cfg.commission_per_share * abs(delta),
            )
        )
    return fills, diag


@dataclass
class BacktestResult:
    config: BacktestConfig
    equity: pd.Series
    gross_leverage: pd.Series
    holdings: pd.Series
    long_value: pd.Series
    short_value: pd.Series
    fills: pd.DataFrame
    positions: pd.DataFrame
    conviction: pd.DataFrame
    feature_log: pd.DataFrame
    benchmark_returns: pd.Series
    diagnostics: dict
    final_state: PortfolioState


def run_backtest(
    data: MarketData | None,
    config: BacktestConfig,
    spec=None,
    seed: int | None = None,
    registry: dict | None = None,
    score_override: pd.DataFrame | None = None,
    inputs: PipelineInputs | None = None,
) -> BacktestResult:
    """Walk the calendar: decide at each rebalance close, fill next open.

    `inputs` may be passed directly (from prepare_inputs) to reuse factor
    computation across runs; otherwise it is built from `data`.
    """
    spec = make_spec(spec if spec is not None else "best")
    if inputs is None:
        if data is None:
            raise ValueError("need market data or prepared inputs")
        inputs = prepare_inputs(data, config, registry, score_override)
    cfg = inputs.config
    cal = inputs.calendar
    n = len(cal)
    if n < cfg.window + cfg.horizon + 1:
        raise InsufficientHistoryError(
            f"{n} sessions cannot cover window {cfg.window} + horizon {cfg.horizon}"
        )
    rebal = set(rebalance_dates(cal, cfg.rebalance))
    col_of = {sym: i for i, sym in enumerate(inputs.symbols)}
    symbols_arr = inputs.symbols.to_numpy()

    state = PortfolioState(
        date=cal[0], cash=cfg.initial_capital, equity=cfg.initial_capital
    )
    pending: Decision | None = None
    started = False
    diagnostics = {
        "skipped_rebalances": 0,
        "unfillable_orders": 0,
        "skipped_exits": 0,
        "partial_fill_dates": [],
        "clipped_rebalances": 0,
        "first_decision_date": None,
        "n_decisions": 0,
        "halted": False,
        "halt_date": None,
    }
    eq_rows, fill_rows, pos_rows, conv_rows, feat_rows = [], [], [], [], []

    for pos in range(n):
        date = cal[pos]
        involved = set(state.positions)
        try:
            if pending is not None:
                fills, diag = _execute_orders(
                    pending, inputs.open[pos], col_of, state.positions, cfg, date
                )
                diagnostics["unfillable_orders"] += diag["unfillable"]
                diagnostics["skipped_exits"] += diag["skipped_exits"]
                if not diag["fully_filled"]:
                    diagnostics["partial_fill_dates"].append(str(date.date()))
                involved |= {f.symbol for f in fills}
                prices = {s: inputs.close_ffill[pos, col_of[s]] for s in involved}
                state = apply_fills(state, fills, prices, date=date)
                for f in fills:
                    fill_rows.append(
                        (str(date.date()), f.symbol, f.shares, f.price, f.commission)
                    )
                pending = None
            else:
                prices = {s: inputs.close_ffill[pos, col_of[s]] for s in involved}
                state = mark_state(state, prices, date=date)
        except BankruptcyHalt as halt:
            diagnostics["halted"] = True
            diagnostics["halt_date"] = str(halt.date)
            eq_rows.append((date, halt.equity, np.nan, len(state.positions), 0.0, 0.0))
            break

        # The trailing-window requirement applies regardless of where scores
        # come from, so override runs trade the same sessions as trained runs.
        if date in rebal and pos + 1 < n and pos >= cfg.window + cfg.horizon - 1:
            try:
                decision = make_decision(
                    inputs,
                    date,
                    state.equity,
                    state.positions,
                    spec,
                    seed=decision_seed(seed, date),
                )
            except InsufficientHistoryError:
                diagnostics["skipped_rebalances"] += 1
                decision = None
            if decision is not None:
                pending = decision
                diagnostics["n_decisions"] += 1
                if decision.clipped:
                    diagnostics["clipped_rebalances"] += 1
                if not started:
                    started = True
                    diagnostics["first_decision_date"] = str(date.date())
                long_set, short_set = set(decision.long), set(decision.short)
                for sym, score in decision.conviction.items():
                    side = (
                        "long"
                        if sym in long_set
                        else "short" if sym in short_set else "none"
                    )
                    conv_rows.append((str(date.date()), sym, score, side))
                for rank, name, score in decision.feature_ranking:
                    feat_rows.append((str(date.date()), rank, name, score))

        if started:
            long_v = short_v = 0.0
            for sym, shares in state.positions.items():
                value = shares * inputs.close_ffill[pos, col_of[sym]]
                if shares > 0:
                    long_v += value
                else:
                    short_v += value
                pos_rows.append(
                    (str(date.date()), sym, shares, value)
                )
            eq_rows.append(
                (
                    date,
                    state.equity,
                    state.gross_leverage,
                    state.holdings,
                    long_v,
                    short_v,
                )
            )

    eq = pd.DataFrame(
        eq_rows,
        columns=["date", "equity", "leverage", "holdings", "long_value", "short_value"],
    )
    eq_index = pd.DatetimeIndex(eq["date"]) if len(eq) else pd.DatetimeIndex([])
    equity = pd.Series(eq["equity"].to_numpy(), index=eq_index, name="equity")
    return BacktestResult(
        config=cfg,
        equity=equity,
        gross_leverage=pd.Series(
            eq["leverage"].to_numpy(), index=eq_index, name="leverage"
        ),
        holdings=pd.Series(eq["holdings"].to_numpy(), index=eq_index, name="holdings"),
        long_value=pd.Series(
            eq["long_value"].to_numpy(), index=eq_index, name="long_value"
        ),
        short_value=pd.Series(
            eq["short_value"].to_numpy(), index=eq_index, name="short_value"
        ),
        fills=pd.DataFrame(
            fill_rows, columns=["date", "symbol", "shares", "price", "commission"]
        ),
        positions=pd.DataFrame(
            pos_rows, columns=["date", "symbol", "shares", "value"]
        ),
        conviction=pd.DataFrame(
            conv_rows, columns=["date", "symbol", "score", "position"]
        ),
        feature_log=pd.DataFrame(feat_rows, columns=["asof", "rank", "feature", "F"]),
        benchmark_returns=inputs.benchmark_returns.reindex(eq_index).fillna(0.0),
        diagnostics=diagnostics,
        final_state=state,
    )


def write_backtest_outputs(result: BacktestResult, out_dir) -> dict[str, Path]:
    """Persist run outputs as deterministic CSVs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}

    eq = pd.DataFrame(
        {
            "date": result.equity.index.strftime("%Y-%m-%d"),
            "equity": result.equity.to_numpy(),
            "leverage": result.gross_leverage.to_numpy(),
        }
    )
    paths["equity"] = out_dir / "equity.csv"
    eq.to_csv(paths["equity"], index=False)

    for name, frame in (
        ("fills", result.fills),
        ("positions", result.positions),
        ("conviction", result.conviction),
        ("feature_log", result.feature_log),
    ):
        paths[name] = out_dir / f"{name}.csv"
        frame.to_csv(paths[name], index=False)

    bench = pd.DataFrame(
        {
            "date": result.benchmark_returns.index.strftime("%Y-%m-%d"),
            "return": result.benchmark_returns.to_numpy(),
        }
    )
    paths["benchmark"] = out_dir / "benchmark.csv"
    bench.to_csv(paths["benchmark"], index=False)
    return paths
