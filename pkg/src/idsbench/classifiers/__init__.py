"""Classical classifiers behind a common fit/predict contract."""
from __future__ import annotations

import inspect
from dataclasses import dataclass, field
from typing import Any, Callable

from ..errors import ConfigError
from .base import FAMILIES, PredictionBatch, TrainedModel, predict
from .boosting import AdaBoost, GradientBoostedTrees, fit_adaboost, fit_gbt
from .discriminant import LinearDiscriminant, fit_lda
from .linear import LogisticRegression, SGDClassifier, fit_logistic_regression, fit_sgd_hinge
from .naive_bayes import GaussianNB, fit_gaussian_nb
from .neighbors import KNearestNeighbors, fit_knn
from .svm import SupportVectorMachine, fit_svm_rbf
from .tree import DecisionTree, RandomForest, fit_decision_tree, fit_random_forest

CLASSICAL = FAMILIES[:-1]

FITTERS: dict[str, Callable[..., TrainedModel]] = {
    "NB": fit_gaussian_nb,
    "LDA": fit_lda,
    "KNN": fit_knn,
    "DT": fit_decision_tree,
    "RF": fit_random_forest,
    "SVM": fit_svm_rbf,
    "LR": fit_logistic_regression,
    "AdaBoost": fit_adaboost,
    "GBT": fit_gbt,
    "SGD": fit_sgd_hinge,
}

_ALIASES = {f.lower(): f for f in FAMILIES} | {"xgboost": "GBT", "mlp": "ANN", "adaboost": "AdaBoost"}


def canonical_family(name: str) -> str:
    try:
        return _ALIASES[str(name).lower()]
    except KeyError:
        raise ConfigError(f"unknown model family {name!r}; expected one of {', '.join(FAMILIES)}") from None


def hyperparam_names(family: str) -> set[str]:
    sig = inspect.signature(FITTERS[family])
    return {p for p in sig.parameters if p not in ("X", "y", "n_classes", "seed")}


@dataclass(frozen=True)
class ModelSpec:
    family: str
    hyperparams: dict[str, Any] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        fam = canonical_family(self.family)
        object.__setattr__(self, "family", fam)
        if fam in FITTERS:
            unknown = set(self.hyperparams) - hyperparam_names(fam)
            if unknown:
                raise ConfigError(f"{fam} has no hyperparameter(s) {sorted(unknown)}")


def fit_model(spec: ModelSpec, X, y, n_classes: int | None = None) -> TrainedModel:
    """Fit the family named by ``spec`` with its defaults overridden by ``spec.hyperparams``."""
    if spec.family not in FITTERS:
        raise ConfigError(f"{spec.family} is not a classical family")
    fn = FITTERS[spec.family]
    kwargs = dict(spec.hyperparams)
    params = inspect.signature(fn).parameters
    if "seed" in params:
        kwargs["seed"] = spec.seed
    return fn(X, y, n_classes=n_classes, **kwargs)


__all__ = [
    "AdaBoost", "CLASSICAL", "DecisionTree", "FAMILIES", "FITTERS", "GaussianNB", "GradientBoostedTrees",
    "KNearestNeighbors", "LinearDiscriminant", "LogisticRegression", "ModelSpec", "PredictionBatch",
    "RandomForest", "SGDClassifier", "SupportVectorMachine", "TrainedModel", "canonical_family", "fit_adaboost",
    "fit_decision_tree", "fit_gaussian_nb", "fit_gbt", "fit_knn", "fit_lda", "fit_logistic_regression",
    "fit_model", "fit_random_forest", "fit_sgd_hinge", "fit_svm_rbf", "predict",
]
