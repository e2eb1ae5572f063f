"""AdaBoost over depth-1 stumps, one-vs-rest for multiple classes."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ._kernels import best_weighted_stump
from .base import BaseClassifier, check_fit_inputs, check_predict_inputs

# Round weight used when a stump is perfect: the value the formula
# 0.5*ln(1/eps - 1) takes at eps = 1e-10.
PERFECT_ROUND_WEIGHT = 0.5 * np.log(1e10 - 1.0)
_ZERO_ERR = 1e-12


@dataclass
class Stump:
    feature: int
    threshold: float
    polarity: float

    def predict(self, X: np.ndarray) -> np.ndarray:
        side = X[:, self.feature] <= self.threshold
        return np.where(side, self.polarity, -self.polarity)


@dataclass
class BinaryBoost:
    """One boosted one-vs-rest margin model."""

    stumps: list = field(default_factory=list)
    weights: list = field(default_factory=list)
    epsilons: list = field(default_factory=list)
    halted: str | None = None

    def margin(self, X: np.ndarray) -> np.ndarray:
        out = np.zeros(len(X))
        for stump, w in zip(self.stumps, self.weights):
            out += w * stump.predict(X)
        return out

    @property
    def weight_sum(self) -> float:
        return float(sum(self.weights))


def fit_binary_boost(X: np.ndarray, z: np.ndarray, n_rounds: int) -> BinaryBoost:
    """Classic reweighting loop on labels z in {-1, +1}.

    Each round fits the best weighted stump; its weighted error eps sets
    the round weight 0.5*ln(1/eps - 1) and samples are reweighted by
    exp(-w * z * h). A perfect round gets the capped weight and ends
    boosting; a round no better than chance (eps >= 0.5) is rejected and
    ends boosting; constant features end it too.
    """
    m = len(z)
    dist = np.full(m, 1.0 / m)
    model = BinaryBoost()
    for _ in range(n_rounds):
        f, thr, pol, err = best_weighted_stump(X, z, dist)
        if f < 0:
            model.halted = "degenerate"
            break
        if err >= 0.5:
            model.halted = "weak"
            break
        stump = Stump(int(f), float(thr), float(pol))
        if err < _ZERO_ERR:
            model.stumps.append(stump)
            model.weights.append(PERFECT_ROUND_WEIGHT)
            model.epsilons.append(float(err))
            model.halted = "perfect"
            break
        w = 0.5 * np.log(1.0 / err - 1.0)
        model.stumps.append(stump)
        model.weights.append(float(w))
        model.epsilons.append(float(err))
        dist = dist * np.exp(-w * z * stump.predict(X))
        dist /= dist.sum()
    return model


class AdaBoost(BaseClassifier):
    """Boosted stumps; multiclass runs one margin model per class and
    predicts the class with the largest weight-normalized margin."""

    algorithm = "adaboost"

    def __init__(self, n_rounds: int = 50):
        if n_rounds < 1:
            raise ValueError("n_rounds must be at least 1")
        self.n_rounds = n_rounds

    def fit(self, X, y):
        t0 = time.perf_counter()
        X, y = check_fit_inputs(X, y)
        self.classes_ = np.unique(y)
        self.models_ = []
        self.halted_ = {}
        rounds = 0
        for cls in self.classes_:
            z = np.where(y == cls, 1.0, -1.0)
            model = fit_binary_boost(X, z, self.n_rounds)
            self.models_.append(model)
            if model.halted:
                self.halted_[int(cls)] = model.halted
            rounds = max(rounds, len(model.stumps))
        self.n_features_ = X.shape[1]
        self._finish_report(X, y, rounds, True, time.perf_counter() - t0)
        return self

    def class_scores(self, X) -> np.ndarray:
        """Margins normalized by each model's total round weight."""
        X = check_predict_inputs(X, self.n_features_)
        out = np.zeros((len(X), len(self.classes_)))
        for idx, model in enumerate(self.models_):
            total = model.weight_sum
            if total > 0:
                out[:, idx] = model.margin(X) / total
        return out

    def to_state(self) -> dict:
        return {
            "n_rounds": self.n_rounds,
            "classes": self.classes_.tolist(),
            "n_features": self.n_features_,
            "models": [
                {
                    "stumps": [
                        [s.feature, s.threshold, s.polarity] for s in m.stumps
                    ],
                    "weights": m.weights,
                    "epsilons": m.epsilons,
                    "halted": m.halted,
                }
                for m in self.models_
            ],
        }

    @classmethod
    def from_state(cls, state: dict) -> "AdaBoost":
        model = cls(n_rounds=state["n_rounds"])
        model.classes_ = np.asarray(state["classes"], dtype=np.int64)
        model.n_features_ = state["n_features"]
        model.models_ = []
        model.halted_ = {}
        for idx, m in enumerate(state["models"]):
            bb = BinaryBoost(
                stumps=[Stump(int(f), float(t), float(p)) for f, t, p in m["stumps"]],
                weights=list(m["weights"]),
                epsilons=list(m["epsilons"]),
                halted=m["halted"],
            )
            model.models_.append(bb)
            if bb.halted:
                model.halted_[int(model.classes_[idx])] = bb.halted
        return model
