"""Common fit/predict contract shared by every model family."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any, ClassVar

import numpy as np

from ..errors import DimensionMismatch, EmptyClass

FAMILIES = ("NB", "LDA", "KNN", "DT", "RF", "SVM", "LR", "AdaBoost", "GBT", "SGD", "ANN")

_REGISTRY: dict[str, type] = {}


def register(cls):
    """Class decorator: make a model dataclass known to the (de)serializer."""
    _REGISTRY[cls.__name__] = cls
    return cls


def registered(name: str) -> type:
    return _REGISTRY[name]


@dataclass
class PredictionBatch:
    labels: np.ndarray
    scores: np.ndarray | None = None


def argmax_lowest(scores: np.ndarray) -> np.ndarray:
    """Row-wise argmax; ties go to the lowest class index (np.argmax already does this)."""
    return np.argmax(scores, axis=1).astype(np.int64)


def as_matrix(X) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D feature matrix, got shape {X.shape}")
    return X


def as_labels(y, n: int | None = None) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1:
        raise DimensionMismatch(f"labels must be 1-D, got shape {y.shape}")
    if n is not None and len(y) != n:
        raise DimensionMismatch(f"{n} rows but {len(y)} labels")
    if len(y) and (y.min() < 0 or not np.all(np.equal(np.mod(y, 1), 0))):
        raise ValueError("labels must be non-negative class indices")
    return y.astype(np.int64)


def resolve_classes(y: np.ndarray, n_classes: int | None, require_all: bool = False) -> int:
    k = int(n_classes) if n_classes is not None else (int(y.max()) + 1 if len(y) else 0)
    if len(y) and y.max() >= k:
        raise ValueError(f"label {y.max()} out of range for {k} classes")
    if require_all:
        counts = np.bincount(y, minlength=k)
        empty = np.flatnonzero(counts == 0)
        if len(empty):
            raise EmptyClass(f"classes {empty.tolist()} have no training samples")
    return k


@dataclass
class TrainedModel:
    """Base for fitted models. Subclasses are dataclasses of numbers and arrays."""

    family: ClassVar[str] = ""
    n_features: int
    n_classes: int
    hyperparams: dict[str, Any] = field(default_factory=dict)

    def check_input(self, X) -> np.ndarray:
        X = as_matrix(X)
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(f"{self.family} model expects {self.n_features} features, got {X.shape[1]}")
        return X

    def predict(self, X) -> PredictionBatch:  # pragma: no cover - abstract
        raise NotImplementedError


def predict(model: TrainedModel, X) -> PredictionBatch:
    return model.predict(X)


# -- (de)serialization of model dataclasses to JSON-compatible trees -------------

def encode(obj):
    if isinstance(obj, np.ndarray):
        return {"__ndarray__": obj.tolist(), "dtype": obj.dtype.str, "shape": list(obj.shape)}
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        body = {f.name: encode(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        return {"__model__": type(obj).__name__, "fields": body}
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def decode(obj):
    if isinstance(obj, dict):
        if "__ndarray__" in obj:
            dtype = np.dtype(obj["dtype"])
            arr = np.asarray(obj["__ndarray__"], dtype=dtype)
            return arr.reshape(obj["shape"])
        if "__model__" in obj:
            cls = _REGISTRY[obj["__model__"]]
            return cls(**{k: decode(v) for k, v in obj["fields"].items()})
        return {k: decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [decode(v) for v in obj]
    return obj
