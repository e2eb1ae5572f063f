"""Long-short equity research toolkit.

Factor computation over OHLCV + fundamentals panels, forward-return
quantile labeling, ANOVA top-k feature selection, a from-scratch
classifier suite combined into voting ensembles, and a walk-forward
dollar-neutral backtest with tear-sheet analytics. A seeded synthetic
market makes the whole pipeline reproducible end to end.
"""
__version__ = "0.1.0"
