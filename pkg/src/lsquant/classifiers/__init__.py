"""From-scratch classifier suite with a uniform fit/predict contract."""
from __future__ import annotations

from .base import BaseClassifier, FitReport
from .bayes import BernoulliNB, GaussianNB
from .boost import AdaBoost, BinaryBoost, Stump, fit_binary_boost
from .linear import LinearSVM, LogisticRegression, SGDClassifier
from .serialize import model_from_json, model_to_json
from .tree import DecisionTree, RandomForest

# algorithm tag on serialized models -> class
ALGORITHMS = {
    "gaussian_nb": GaussianNB,
    "bernoulli_nb": BernoulliNB,
    "logistic": LogisticRegression,
    "sgd": SGDClassifier,
    "svm": LinearSVM,
    "decision_tree": DecisionTree,
    "random_forest": RandomForest,
    "adaboost": AdaBoost,
}

_SEEDED = {"sgd", "random_forest"}

# constructor tags accepted by ensembles and the CLI
_FACTORY: dict[str, tuple] = {
    "gaussian_nb": (GaussianNB, {}),
    "bernoulli_nb": (BernoulliNB, {}),
    "logistic": (LogisticRegression, {"penalty": "l2"}),
    "logistic_l2": (LogisticRegression, {"penalty": "l2"}),
    "logistic_l1": (LogisticRegression, {"penalty": "l1"}),
    "sgd": (SGDClassifier, {}),
    "svm": (LinearSVM, {}),
    "decision_tree": (DecisionTree, {}),
    "random_forest": (RandomForest, {}),
    "adaboost": (AdaBoost, {}),
}


def algorithm_tags() -> list[str]:
    return list(_FACTORY)


def make_classifier(tag: str, seed: int | None = None, **overrides):
    """Build an unfitted classifier from a tag; seed reaches the
    algorithms that randomize (sgd, random_forest)."""
    if tag not in _FACTORY:
        raise KeyError(f"unknown algorithm tag: {tag}")
    cls, defaults = _FACTORY[tag]
    kwargs = {**defaults, **overrides}
    if cls.algorithm in _SEEDED and "seed" not in kwargs:
        kwargs["seed"] = seed
    return cls(**kwargs)


__all__ = [
    "ALGORITHMS",
    "AdaBoost",
    "BaseClassifier",
    "BernoulliNB",
    "BinaryBoost",
    "DecisionTree",
    "FitReport",
    "GaussianNB",
    "LinearSVM",
    "LogisticRegression",
    "RandomForest",
    "SGDClassifier",
    "Stump",
    "algorithm_tags",
    "fit_binary_boost",
    "make_classifier",
    "model_from_json",
    "model_to_json",
]
