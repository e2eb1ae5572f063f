"""Univariate feature scoring and top-k selection.

Each feature is scored by a one-way ANOVA F statistic across the label
classes: between-class mean square over within-class mean square, where
the between term averages the size-weighted squared mean offsets over
the number of classes and the within term uses n - G degrees of freedom.
Separable features (zero within-class variance, nonzero between) score
F_SENTINEL so they always rank first.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

F_SENTINEL = 1e12


def anova_f_scores(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Per-column F score of X's columns against the class labels y."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or len(y) != X.shape[0]:
        raise ValueError("X must be 2-D with one label per row")
    if not np.isfinite(X).all():
        raise ValueError("X contains non-finite values")
    classes, counts = np.unique(y, return_counts=True)
    n, k = X.shape
    g = len(classes)
    if g < 2:
        raise ValueError("need at least two classes to score features")

    grand = X.mean(axis=0)
    ss_between = np.zeros(k)
    ss_within = np.zeros(k)
    for cls, cnt in zip(classes, counts):
        block = X[y == cls]
        mean = block.mean(axis=0)
        ss_between += cnt * (mean - grand) ** 2
        ss_within += ((block - mean) ** 2).sum(axis=0)

    ms_between = ss_between / g
    ms_within = ss_within / (n - g) if n > g else np.zeros(k)
    out = np.empty(k)
    for j in range(k):
        if ms_within[j] > 0:
            out[j] = ms_between[j] / ms_within[j]
        else:
            out[j] = F_SENTINEL if ms_between[j] > 0 else 0.0
    return out


@dataclass
class SelectionResult:
    """Outcome of one top-k pass."""

    selected: list[str]          # kept features, in input (registry) order
    ranking: list[tuple]         # (rank, name, score) by descending score
    k_requested: int
    k_effective: int


def select_k_best(
    names: list[str], scores: np.ndarray, k: int
) -> SelectionResult:
    """Keep the k highest-scoring features; ties keep the earlier name.

    When fewer than k features are available all of them are kept and
    k_effective records how many that was.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    scores = np.asarray(scores, dtype=float)
    if len(names) != len(scores):
        raise ValueError("names and scores differ in length")
    order = np.lexsort((np.arange(len(names)), -scores))
    k_eff = min(k, len(names))
    chosen = set(order[:k_eff])
    selected = [n for i, n in enumerate(names) if i in chosen]
    ranking = [
        (rank + 1, names[i], float(scores[i])) for rank, i in enumerate(order)
    ]
    return SelectionResult(
        selected=selected,
        ranking=ranking,
        k_requested=k,
        k_effective=k_eff,
    )
