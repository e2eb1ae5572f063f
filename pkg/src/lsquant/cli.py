"""Command-line entry point.

Subcommands wire the library end to end: ingest raw CSVs, generate a
seeded synthetic market, list or analyze factors, run the walk-forward
backtest with tear-sheet outputs, and compare classifier accuracy on a
chronological split. All randomness flows from the single seed in the
run config; logs go to stderr and data to files, so runs are scriptable
and byte-reproducible.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import sys
from pathlib import Path

import pandas as pd

from . import analytics, synth
from .backtest import (
    BacktestConfig,
    prepare_inputs,
    run_backtest,
    write_backtest_outputs,
)
from .dataset import build_training_window, forward_returns, quantile_labels
from .ensemble import PRESETS, compare_algorithms, make_spec
from .errors import ConfigError, InputDataError, InsufficientHistoryError
from .factors import compute_factors, default_registry, standardize_cross_section
from .market_data import ingest_bars, ingest_fundamentals, write_panels

log = logging.getLogger("lsquant")

_RUN_EXTRA_KEYS = {
    "bars",
    "fundamentals",
    "ensemble",
    "use_scores",
    "seed",
    "out_dir",
    "score_override",
}


@dataclasses.dataclass
class RunConfig:
    backtest: BacktestConfig
    bars: str
    fundamentals: str | None = None
    ensemble: str | list = "best"
    use_scores: bool = False
    seed: int = 0
    out_dir: str = "run_output"
    score_override: str | None = None

    def echo(self) -> dict:
        doc = dataclasses.asdict(self.backtest)
        if doc["features"] is not None:
            doc["features"] = list(doc["features"])
        doc.update(
            bars=self.bars,
            fundamentals=self.fundamentals,
            ensemble=self.ensemble,
            use_scores=self.use_scores,
            seed=self.seed,
            out_dir=self.out_dir,
            score_override=self.score_override,
        )
        return doc


def load_run_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise InputDataError(f"config file not found: {path}")
    raw = json.loads(path.read_text())
    if not isinstance(raw, dict):
        raise ConfigError("run config must be a JSON object")
    bt_fields = {f.name for f in dataclasses.fields(BacktestConfig)}
    unknown = sorted(set(raw) - bt_fields - _RUN_EXTRA_KEYS)
    if unknown:
        raise ConfigError(f"unknown run config keys: {unknown}")
    if "bars" not in raw:
        raise ConfigError("run config needs a 'bars' data path")
    if "seed" in raw and (not isinstance(raw["seed"], int) or raw["seed"] < 0):
        raise ConfigError("seed must be a non-negative integer")
    bt = BacktestConfig(**{k: v for k, v in raw.items() if k in bt_fields})
    extras = {k: v for k, v in raw.items() if k in _RUN_EXTRA_KEYS}
    return RunConfig(backtest=bt, **extras)


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(out_dir: Path, config_doc: dict, input_paths: dict) -> None:
    manifest = {
        "config": config_doc,
        "inputs": {
            name: {"path": str(p), "sha256": _sha256(p)}
            for name, p in input_paths.items()
            if p is not None
        },
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )


def _load_market(bars_path, fundamentals_path=None):
    data, bars_report = ingest_bars(str(bars_path))
    reports = {"bars": bars_report.to_dict()}
    if fundamentals_path:
        fnd, f_report = ingest_fundamentals(str(fundamentals_path))
        data.fundamentals = fnd
        reports["fundamentals"] = f_report.to_dict()
    return data, reports


def cmd_ingest(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    data, reports = _load_market(args.bars, args.fundamentals)
    written = write_panels(data, str(out_dir))
    (out_dir / "validation_report.json").write_text(
        json.dumps(reports, indent=2, sort_keys=True) + "\n"
    )
    for report_name, report in reports.items():
        log.info(
            "%s: %d rows read, %d accepted, rejected %s",
            report_name,
            report["rows_read"],
            report["rows_accepted"],
            report["rejected"] or "none",
        )
    log.info("wrote %d files to %s", len(written) + 1, out_dir)
    return 0


def cmd_synth(args) -> int:
    config = synth.SynthConfig(
        n_symbols=args.symbols,
        n_days=args.days,
        signal_strength=args.signal_strength,
        seed=args.seed,
    )
    market = synth.generate_market(config)
    paths = synth.write_market(market, args.out)
    echo = dataclasses.asdict(config)
    (Path(args.out) / "synth_config.json").write_text(
        json.dumps(echo, indent=2, sort_keys=True) + "\n"
    )
    for name, path in paths.items():
        log.info("wrote %s: %s", name, path)
    return 0


def cmd_factors(args) -> int:
    registry = default_registry()
    if args.list or not args.bars:
        for name, spec in registry.items():
            print(f"{name}: {spec.description}")
        return 0
    data, _ = _load_market(args.bars, args.fundamentals)
    names = args.names or list(registry)
    panels = compute_factors(data, names=names, registry=registry)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, panel in panels.items():
        panel.to_csv(out_dir / f"factor_{name}.csv", date_format="%Y-%m-%d")
    log.info("wrote %d factor panels to %s", len(panels), out_dir)
    return 0


def cmd_analyze_factor(args) -> int:
    data, _ = _load_market(args.bars, args.fundamentals)
    registry = default_registry()
    if args.factor not in registry:
        raise ConfigError(
            f"unknown factor '{args.factor}'; run 'lsquant factors --list'"
        )
    panel = compute_factors(data, names=[args.factor], registry=registry)[args.factor]
    report = analytics.quantile_report(
        panel, data.close, n_quantiles=args.quantiles, horizons=tuple(args.horizons)
    )
    path = analytics.write_quantile_report(report, args.out)
    log.info("quantile report for %s written to %s", args.factor, path.parent)
    return 0


def cmd_backtest(args) -> int:
    run = load_run_config(args.config)
    out_dir = Path(run.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_manifest(
        out_dir,
        run.echo(),
        {
            "bars": run.bars,
            "fundamentals": run.fundamentals,
            "score_override": run.score_override,
        },
    )
    try:
        data, _ = _load_market(run.bars, run.fundamentals)
        override = None
        if run.score_override:
            override = synth.read_latent(run.score_override).reindex(
                index=data.dates, columns=data.close.columns
            )
        inputs = prepare_inputs(data, run.backtest, score_override=override)
        spec = make_spec(run.ensemble, use_scores=run.use_scores)
        result = run_backtest(None, run.backtest, spec, seed=run.seed, inputs=inputs)
        paths = write_backtest_outputs(result, out_dir)
        if len(result.equity) >= 2:
            tearsheet = analytics.build_tearsheet(
                result.equity,
                result.benchmark_returns,
                result.holdings,
                result.gross_leverage,
                result.long_value,
                result.short_value,
            )
            paths["tearsheet"] = analytics.write_tearsheet(tearsheet, out_dir)
            log.info(
                "total return %.2f%%, sharpe %s, max drawdown %.2f%%",
                tearsheet.total_return_pct,
                "n/a" if tearsheet.sharpe is None else f"{tearsheet.sharpe:.2f}",
                tearsheet.max_drawdown_pct,
            )
        (out_dir / "diagnostics.json").write_text(
            json.dumps(result.diagnostics, indent=2, sort_keys=True) + "\n"
        )
        log.info("backtest outputs in %s", out_dir)
        return 0
    except (InputDataError, InsufficientHistoryError, ValueError) as exc:
        (out_dir / "error_manifest.json").write_text(
            json.dumps({"error": str(exc)}, indent=2, sort_keys=True) + "\n"
        )
        raise


def cmd_compare(args) -> int:
    run = load_run_config(args.config)
    out_dir = Path(run.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    data, _ = _load_market(run.bars, run.fundamentals)
    cfg = run.backtest
    registry = default_registry()
    names = list(cfg.features) if cfg.features else list(registry)
    raw = compute_factors(data, names=names, registry=registry)
    factors = {n: standardize_cross_section(p) for n, p in raw.items()}
    labels = quantile_labels(
        forward_returns(data.close, cfg.horizon), cfg.upper, cfg.lower
    )
    window = build_training_window(
        factors,
        labels,
        data.dates[-1],
        window=cfg.window,
        horizon=cfg.horizon,
        max_missing=cfg.max_missing,
        exclude_zero_labels=cfg.exclude_zero_labels,
    )
    table = compare_algorithms(
        window,
        args.algorithms,
        k=cfg.top_k,
        seed=run.seed,
        upper=cfg.upper,
        lower=cfg.lower,
    )
    path = out_dir / "accuracy.csv"
    table.to_csv(path, index=False)
    print(table.to_string(index=False))
    log.info("accuracy table written to %s", path)
    return 0


def cmd_report(args) -> int:
    run_dir = Path(args.run_dir)
    equity_path = run_dir / "equity.csv"
    if not equity_path.exists():
        raise InputDataError(f"no equity.csv in {run_dir}")
    eq = pd.read_csv(
        equity_path,
        parse_dates=["date"],
        index_col="date",
        float_precision="round_trip",
    )
    bench_path = run_dir / "benchmark.csv"
    if bench_path.exists():
        bench = pd.read_csv(
            bench_path,
            parse_dates=["date"],
            index_col="date",
            float_precision="round_trip",
        )["return"]
    else:
        bench = pd.Series(0.0, index=eq.index)
    positions_path = run_dir / "positions.csv"
    if positions_path.exists() and positions_path.stat().st_size > 0:
        pos = pd.read_csv(
            positions_path, parse_dates=["date"], float_precision="round_trip"
        )
        by_date = pos.groupby("date")
        holdings = by_date["symbol"].count().reindex(eq.index).fillna(0)
        long_value = (
            pos[pos["value"] > 0].groupby("date")["value"].sum().reindex(eq.index)
        ).fillna(0.0)
        short_value = (
            pos[pos["value"] < 0].groupby("date")["value"].sum().reindex(eq.index)
        ).fillna(0.0)
    else:
        holdings = pd.Series(0, index=eq.index)
        long_value = pd.Series(0.0, index=eq.index)
        short_value = pd.Series(0.0, index=eq.index)
    tearsheet = analytics.build_tearsheet(
        eq["equity"],
        bench,
        holdings,
        eq["leverage"],
        long_value,
        short_value,
    )
    path = analytics.write_tearsheet(tearsheet, args.out or run_dir)
    log.info("tear sheet written to %s", path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lsquant",
        description="Long-short equity research: factors, classifiers, backtests.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate raw CSVs and persist panels")
    p.add_argument("--bars", required=True, help="OHLCV CSV path")
    p.add_argument("--fundamentals", help="long-form fundamentals CSV path")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("synth", help="generate a seeded synthetic market")
    p.add_argument("--symbols", type=int, default=100)
    p.add_argument("--days", type=int, default=750)
    p.add_argument("--signal-strength", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("factors", help="list or compute registry factors")
    p.add_argument("--list", action="store_true", help="print the registry")
    p.add_argument("--bars")
    p.add_argument("--fundamentals")
    p.add_argument("--names", nargs="*", help="subset of factors to compute")
    p.add_argument("--out", default="factor_output")
    p.set_defaults(func=cmd_factors)

    p = sub.add_parser("analyze-factor", help="quantile forward-return report")
    p.add_argument("--bars", required=True)
    p.add_argument("--fundamentals")
    p.add_argument("--factor", required=True)
    p.add_argument("--quantiles", type=int, default=3)
    p.add_argument("--horizons", type=int, nargs="*", default=[1, 5, 22])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze_factor)

    p = sub.add_parser("backtest", help="walk-forward run from a JSON config")
    p.add_argument("--config", required=True, help="RunConfig JSON path")
    p.set_defaults(func=cmd_backtest)

    p = sub.add_parser("compare", help="accuracy table on a chronological split")
    p.add_argument("--config", required=True, help="RunConfig JSON path")
    p.add_argument(
        "--algorithms",
        nargs="+",
        required=True,
        help=f"algorithm tags or presets {sorted(PRESETS)}",
    )
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("report", help="rebuild the tear sheet from a run directory")
    p.add_argument("--run-dir", required=True)
    p.add_argument("--out", help="defaults to the run directory")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s"
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (
        ConfigError,
        InputDataError,
        InsufficientHistoryError,
        FileNotFoundError,
        KeyError,
        ValueError,
    ) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
