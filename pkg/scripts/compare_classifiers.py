#!/usr/bin/env python3
"""Classifier bake-off on one planted-signal training window.

Builds a market with a weak latent signal, assembles a training window
of standardized factors and forward-return quantile labels, then scores
every requested algorithm on a chronological 80/20 split. Top/bottom
accuracy counts only each test day's highest- and lowest-scored names,
which is what a long-short book actually trades.
"""
import argparse
import sys

from lsquant.classifiers import algorithm_tags
from lsquant.dataset import build_training_window, forward_returns, quantile_labels
from lsquant.ensemble import PRESETS, compare_algorithms
from lsquant.factors import compute_factors, standardize_cross_section
from lsquant.synth import SynthConfig, generate_market


def parse_args(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--symbols", type=int, default=60)
    p.add_argument("--days", type=int, default=320)
    p.add_argument("--strength", type=float, default=0.3)
    p.add_argument("--synth-seed", type=int, default=23)
    p.add_argument("--run-seed", type=int, default=9)
    p.add_argument("--window", type=int, default=200)
    p.add_argument("--horizon", type=int, default=5)
    p.add_argument("--top-k", type=int, default=15,
                   help="features kept by the shared selection stage")
    p.add_argument("--algorithms", nargs="*", default=None,
                   help="tags and/or ensemble presets; default runs all")
    p.add_argument("--out", default=None, help="optional CSV path")
    return p.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    algorithms = args.algorithms
    if not algorithms:
        algorithms = list(PRESETS) + algorithm_tags()

    market = generate_market(SynthConfig(
        n_symbols=args.symbols,
        n_days=args.days,
        signal_strength=args.strength,
        seed=args.synth_seed,
    ))
    data = market.to_market_data()
    factors = {
        name: standardize_cross_section(panel)
        for name, panel in compute_factors(data).items()
    }
    labels = quantile_labels(forward_returns(data.close, args.horizon))
    window = build_training_window(
        factors,
        labels,
        asof=data.close.index[-1],
        window=args.window,
        horizon=args.horizon,
    )
    print(f"window as of {window.asof.date()}: {window.X.shape[0]} rows, "
          f"{window.X.shape[1]} features, top {args.top_k} kept")

    table = compare_algorithms(window, algorithms, k=args.top_k,
                               seed=args.run_seed)
    ordered = table.sort_values("top_bottom_accuracy", ascending=False)
    print(ordered.round(4).to_string(index=False))
    if args.out:
        table.to_csv(args.out, index=False)
        print(f"table written to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
