"""Confusion matrices and precision / recall / F1 / accuracy."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyMatrix, LabelOutOfRange, LengthMismatch


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[t, p] = number of rows with true class t predicted as p."""

    counts: np.ndarray

    @property
    def k(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def tp(self) -> np.ndarray:
        return np.diag(self.counts).astype(np.int64)

    def fp(self) -> np.ndarray:
        return self.counts.sum(axis=0) - self.tp()

    def fn(self) -> np.ndarray:
        return self.counts.sum(axis=1) - self.tp()

    def tn(self) -> np.ndarray:
        return self.total - self.tp() - self.fp() - self.fn()

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.counts + other.counts)


def confusion(y_true, y_pred, k: int) -> ConfusionMatrix:
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise LengthMismatch(f"{len(y_true)} true labels vs {len(y_pred)} predictions")
    for name, v in (("true", y_true), ("predicted", y_pred)):
        if len(v) and (v.min() < 0 or v.max() >= k):
            raise LabelOutOfRange(f"{name} label outside 0..{k - 1}")
    counts = np.bincount(y_true * k + y_pred, minlength=k * k).reshape(k, k)
    return ConfusionMatrix(counts)


def _ratio(num: np.ndarray, den: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    num = num.astype(np.float64)
    den = den.astype(np.float64)
    undefined = den == 0
    return np.divide(num, den, out=np.zeros_like(num), where=~undefined), undefined


@dataclass
class MetricsReport:
    accuracy: float
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    weighted: dict[str, float]
    macro: dict[str, float]
    undefined: dict[str, list[int]] = field(default_factory=dict)

    @property
    def precision_weighted(self) -> float:
        return self.weighted["precision"]

    @property
    def recall_weighted(self) -> float:
        return self.weighted["recall"]

    @property
    def f1_weighted(self) -> float:
        return self.weighted["f1"]

    def summary(self) -> dict[str, float]:
        return {"accuracy": self.accuracy,
                "precision": self.weighted["precision"], "recall": self.weighted["recall"],
                "f1": self.weighted["f1"],
                "precision_macro": self.macro["precision"], "recall_macro": self.macro["recall"],
                "f1_macro": self.macro["f1"]}


def compute_metrics(cm: ConfusionMatrix) -> MetricsReport:
    """Per-class one-vs-rest metrics plus support-weighted and macro averages.

    0/0 precision or recall is defined as 0; the affected classes are listed in
    ``report.undefined``.
    """
    total = cm.total
    if total <= 0:
        raise EmptyMatrix("confusion matrix has no rows")
    tp, fp, fn = cm.tp(), cm.fp(), cm.fn()
    precision, p_undef = _ratio(tp, tp + fp)
    recall, r_undef = _ratio(tp, tp + fn)
    f1, f_undef = _ratio(2 * precision * recall, precision + recall)
    support = cm.counts.sum(axis=1).astype(np.int64)
    w = support / total
    weighted = {"precision": float(w @ precision), "recall": float(w @ recall), "f1": float(w @ f1)}
    macro = {"precision": float(precision.mean()), "recall": float(recall.mean()), "f1": float(f1.mean())}
    undefined = {name: np.flatnonzero(mask).tolist()
                 for name, mask in (("precision", p_undef), ("recall", r_undef), ("f1", f_undef)) if mask.any()}
    return MetricsReport(accuracy=float(np.trace(cm.counts) / total), precision=precision, recall=recall,
                         f1=f1, support=support, weighted=weighted, macro=macro, undefined=undefined)


def evaluate(y_true, y_pred, k: int) -> MetricsReport:
    return compute_metrics(confusion(y_true, y_pred, k))
