import numpy as np
import pandas as pd
import pytest

from lsquant.classifiers import make_classifier


@pytest.fixture(scope="session", autouse=True)
def _warm_numba():
    # First call into each compiled kernel pays the JIT cost; do it here so
    # timed acceptance tests measure the algorithms, not the compiler.
    X, y = two_blobs(40, seed=0)
    for tag in ("logistic_l1", "sgd", "decision_tree", "adaboost"):
        make_classifier(tag, seed=0).fit(X, y)


def two_blobs(n: int, seed: int, gap: float = 4.0, n_features: int = 4):
    """Two separable gaussian clusters, labels -1/+1, n samples total."""
    rng = np.random.default_rng(seed)
    half = n // 2
    lo = rng.normal(-gap / 2, 1.0, size=(half, n_features))
    hi = rng.normal(gap / 2, 1.0, size=(n - half, n_features))
    X = np.vstack([lo, hi])
    y = np.array([-1] * half + [1] * (n - half))
    order = rng.permutation(n)
    return X[order], y[order]


@pytest.fixture
def blobs():
    return two_blobs


def make_bars(n_days: int, n_symbols: int, seed: int = 0, start: str = "2020-01-02"):
    """Small random OHLCV panel bundle for indicator/factor tests."""
    rng = np.random.default_rng(seed)
    dates = pd.bdate_range(start, periods=n_days)
    syms = [f"S{i:02d}" for i in range(n_symbols)]
    close = pd.DataFrame(
        100 * np.cumprod(1 + rng.normal(0, 0.02, (n_days, n_symbols)), axis=0),
        index=dates,
        columns=syms,
    )
    spread = np.abs(rng.normal(0, 0.01, (n_days, n_symbols)))
    open_ = close * (1 + rng.normal(0, 0.005, (n_days, n_symbols)))
    high = np.maximum(open_, close) * (1 + spread)
    low = np.minimum(open_, close) * (1 - spread)
    volume = pd.DataFrame(
        rng.integers(10_000, 1_000_000, (n_days, n_symbols)).astype("int64"),
        index=dates,
        columns=syms,
    )
    return {
        "open": open_,
        "high": pd.DataFrame(high, index=dates, columns=syms),
        "low": pd.DataFrame(low, index=dates, columns=syms),
        "close": close,
        "volume": volume,
    }


@pytest.fixture
def bar_panels():
    return make_bars
