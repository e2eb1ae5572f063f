"""Classifier committees over a shared feature selection.

A spec names the member algorithms and their vote weights. Fitting runs
top-k feature selection once on the training window, then trains every
member on the same selected columns. The conviction score of a sample is
the weighted sum of hard class predictions in [-1, +1]; an experimental
flag switches to combining expected class values from per-class
probabilities instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .classifiers import algorithm_tags, make_classifier
from .dataset import TrainingWindow
from .selection import SelectionResult, anova_f_scores, select_k_best

PRESETS = {
    "ensemble1": ("logistic", "gaussian_nb", "bernoulli_nb", "sgd"),
    "best": ("gaussian_nb", "logistic_l1", "decision_tree", "sgd"),
}

WEIGHT_SUM_TOL = 1e-12


class EnsembleFitError(RuntimeError):
    """A member failed to fit; the message names it."""


@dataclass
class EnsembleSpec:
    members: tuple[str, ...] = PRESETS["best"]
    weights: tuple[float, ...] | None = None
    use_scores: bool = False

    def __post_init__(self):
        if not self.members:
            raise ValueError("ensemble needs at least one member")
        known = algorithm_tags()
        bad = [m for m in self.members if m not in known]
        if bad:
            raise ValueError(
                f"unknown ensemble members {bad}; valid tags: {sorted(known)}"
            )
        if self.weights is None:
            self.weights = tuple(1.0 / len(self.members) for _ in self.members)
        else:
            self.weights = tuple(float(w) for w in self.weights)
            if len(self.weights) != len(self.members):
                raise ValueError("one weight per member required")
            if any(w < 0 for w in self.weights):
                raise ValueError("weights must be non-negative")
            if abs(sum(self.weights) - 1.0) > WEIGHT_SUM_TOL:
                raise ValueError("weights must sum to 1")


def make_spec(name_or_spec, use_scores: bool = False) -> EnsembleSpec:
    """Resolve a preset name, member list, or pass through a spec."""
    if isinstance(name_or_spec, EnsembleSpec):
        return name_or_spec
    if isinstance(name_or_spec, str):
        if name_or_spec not in PRESETS:
            raise KeyError(f"unknown ensemble preset: {name_or_spec}")
        return EnsembleSpec(members=PRESETS[name_or_spec], use_scores=use_scores)
    return EnsembleSpec(members=tuple(name_or_spec), use_scores=use_scores)


@dataclass
class FittedEnsemble:
    spec: EnsembleSpec
    models: list
    feature_names: list[str]
    selection: SelectionResult
    asof: pd.Timestamp
    member_reports: dict = field(default_factory=dict)

    def conviction(self, X: np.ndarray) -> np.ndarray:
        """Weighted committee score per row, in [-1, +1]."""
        X = np.asarray(X, dtype=float)
        out = np.zeros(len(X))
        for model, weight in zip(self.models, self.spec.weights):
            if self.spec.use_scores:
                probs = model.class_probabilities(X)
                expected = probs @ model.classes_.astype(float)
                out += weight * expected
            else:
                out += weight * model.predict(X).astype(float)
        return out

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Sign of the conviction as a {-1, 0, +1} committee label."""
        return np.sign(self.conviction(X)).astype(np.int64)


def fit_ensemble(
    window: TrainingWindow,
    spec: EnsembleSpec,
    k: int = 15,
    seed: int | None = None,
) -> FittedEnsemble:
    """Select features once, then fit every member on those columns."""
    f_scores = anova_f_scores(window.X, window.y)
    selection = select_k_best(window.feature_names, f_scores, k)
    col_idx = [window.feature_names.index(name) for name in selection.selected]
    X_sel = np.ascontiguousarray(window.X[:, col_idx])

    child_seeds = np.random.SeedSequence(seed).spawn(len(spec.members))
    models = []
    reports = {}
    for tag, child in zip(spec.members, child_seeds):
        member_seed = int(child.generate_state(1)[0])
        model = make_classifier(tag, seed=member_seed)
        try:
            model.fit(X_sel, window.y)
        except Exception as exc:
            raise EnsembleFitError(f"member '{tag}' failed to fit: {exc}") from exc
        models.append(model)
        reports[tag] = model.fit_report_
    return FittedEnsemble(
        spec=spec,
        models=models,
        feature_names=selection.selected,
        selection=selection,
        asof=window.asof,
        member_reports=reports,
    )


def compare_algorithms(
    window: TrainingWindow,
    tags,
    k: int = 15,
    seed: int | None = None,
    upper: float = 0.3,
    lower: float = 0.3,
    train_frac: float = 0.8,
    use_scores: bool = False,
) -> pd.DataFrame:
    """Accuracy table over a chronological train/test split.

    The window's rows are split 80/20 by distinct date (earlier dates
    train, later test; never shuffled, so nothing leaks backwards). Each
    tag is either a preset name or a single algorithm, fitted as an
    ensemble so feature selection happens on the training rows only.
    Overall accuracy scores every test row; top-and-bottom accuracy
    scores only the per-date extremes the committee would trade, and
    only against realized +-1 labels.
    """
    if not tags:
        raise ValueError("need at least one algorithm tag")
    if not 0 < train_frac < 1:
        raise ValueError("train_frac must be in (0, 1)")
    dates = window.dates
    uniq = np.unique(dates)
    if len(uniq) < 2:
        raise ValueError("need at least 2 distinct dates to split")
    n_train = min(max(int(round(train_frac * len(uniq))), 1), len(uniq) - 1)
    cut = uniq[n_train - 1]
    train_mask = dates <= cut
    test_mask = ~train_mask

    train_window = TrainingWindow(
        X=np.ascontiguousarray(window.X[train_mask]),
        y=window.y[train_mask],
        feature_names=window.feature_names,
        asof=pd.Timestamp(cut),
        dates=dates[train_mask],
        symbols=window.symbols[train_mask],
    )
    X_test_full = window.X[test_mask]
    y_test = window.y[test_mask]
    test_dates = dates[test_mask]
    test_symbols = window.symbols[test_mask]

    rows = []
    for tag in tags:
        if tag in PRESETS or isinstance(tag, EnsembleSpec):
            spec = make_spec(tag, use_scores=use_scores)
        else:
            spec = EnsembleSpec(members=(tag,), use_scores=use_scores)
        fitted = fit_ensemble(train_window, spec, k=k, seed=seed)
        cols = [window.feature_names.index(n) for n in fitted.feature_names]
        X_test = np.ascontiguousarray(X_test_full[:, cols])
        overall = float(np.mean(fitted.predict(X_test) == y_test))

        conviction = fitted.conviction(X_test)
        correct = counted = 0
        for date in np.unique(test_dates):
            at = test_dates == date
            scores = pd.Series(conviction[at], index=test_symbols[at])
            k_date = len(scores)
            n_up = math.ceil(upper * k_date)
            n_dn = min(math.ceil(lower * k_date), k_date - n_up)
            picks = select_positions(scores, n_up, n_dn)
            truth = dict(zip(test_symbols[at], y_test[at]))
            for sym in picks.long:
                if truth[sym] != 0:
                    counted += 1
                    correct += truth[sym] == 1
            for sym in picks.short:
                if truth[sym] != 0:
                    counted += 1
                    correct += truth[sym] == -1
        top_bottom = correct / counted if counted else np.nan
        rows.append(
            {
                "algorithm": tag if isinstance(tag, str) else "+".join(spec.members),
                "overall_accuracy": overall,
                "top_bottom_accuracy": top_bottom,
                "n_train": int(train_mask.sum()),
                "n_test": int(test_mask.sum()),
                "n_top_bottom": counted,
            }
        )
    return pd.DataFrame(rows)


@dataclass
class Positions:
    long: list[str]
    short: list[str]
    dropped_overlap: int = 0


def select_positions(scores: pd.Series, n_long: int, n_short: int) -> Positions:
    """Pick the n_long best and n_short worst scores.

    One descending ordering (ties broken by symbol) serves both legs, so
    with n_long + n_short <= len(scores) the legs cannot collide; any
    symbol that still lands in both is dropped from both and counted.
    """
    if n_long < 0 or n_short < 0:
        raise ValueError("leg sizes must be non-negative")
    if n_long + n_short > len(scores):
        raise ValueError(
            f"{n_long}+{n_short} positions requested from {len(scores)} symbols"
        )
    values = scores.to_numpy(dtype=float)
    if not np.isfinite(values).all():
        raise ValueError("conviction scores must be finite")
    symbols = scores.index.to_numpy()
    order = np.lexsort((symbols, -values))
    longs = list(symbols[order[:n_long]])
    shorts = list(symbols[order[len(order) - n_short :]]) if n_short else []
    overlap = set(longs) & set(shorts)
    if overlap:
        longs = [s for s in longs if s not in overlap]
        shorts = [s for s in shorts if s not in overlap]
    return Positions(long=longs, short=shorts, dropped_overlap=len(overlap))
