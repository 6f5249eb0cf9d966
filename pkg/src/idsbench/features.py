"""Pearson-correlation feature scoring, ranking and top-k selection."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import Dataset, TaskKind
from .errors import LengthMismatch, SizeOutOfRange


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample correlation coefficient; 0.0 when either vector is constant."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"pearson needs two 1-D vectors of equal length, got {x.shape} and {y.shape}")
    if len(x) < 2:
        raise LengthMismatch("pearson needs at least 2 points")
    return float(_corr_columns(x[:, None], y[:, None])[0, 0])


def _corr_columns(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Correlation of every column of X with every column of Y, shape (dx, dy)."""
    Xc = X - X.mean(axis=0)
    Yc = Y - Y.mean(axis=0)
    sx = np.sqrt((Xc * Xc).sum(axis=0))
    sy = np.sqrt((Yc * Yc).sum(axis=0))
    num = Xc.T @ Yc
    den = np.outer(sx, sy)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    return np.clip(r, -1.0, 1.0)


@dataclass(frozen=True)
class CorrelationScore:
    feature: str
    r: float
    score: float
    degenerate: bool = False


@dataclass(frozen=True)
class RankedFeatures:
    entries: tuple[CorrelationScore, ...]
    task: TaskKind = TaskKind.BINARY

    @property
    def names(self) -> list[str]:
        return [e.feature for e in self.entries]

    def __len__(self):
        return len(self.entries)

    def to_rows(self) -> list[tuple[int, str, float]]:
        return [(i + 1, e.feature, e.score) for i, e in enumerate(self.entries)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["rank", "feature", "score"])
        for rank, name, score in self.to_rows():
            w.writerow([rank, name, f"{score:.6f}"])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"task": self.task.value,
                "entries": [[e.feature, e.r, e.score, e.degenerate] for e in self.entries]}

    @classmethod
    def from_dict(cls, d) -> "RankedFeatures":
        return cls(tuple(CorrelationScore(f, r, s, bool(g)) for f, r, s, g in d["entries"]),
                   TaskKind.parse(d["task"]))


@dataclass(frozen=True)
class FeatureSubset:
    names: tuple[str, ...]
    source_rank: RankedFeatures
    size: int


def score_matrix(X: np.ndarray, y: np.ndarray, task: TaskKind | str, n_classes: int | None = None):
    """Return ``(r, score)`` arrays, one entry per column of ``X``.

    Binary: r against the 0/1 label. Multiclass: for each feature, the
    one-vs-rest indicator with the largest |r| wins.
    """
    task = TaskKind.parse(task)
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if task is TaskKind.BINARY:
        r = _corr_columns(X, (y != 0).astype(np.float64)[:, None])[:, 0]
    else:
        K = int(n_classes if n_classes is not None else y.max() + 1)
        ind = (y[:, None] == np.arange(K)[None, :]).astype(np.float64)
        R = _corr_columns(X, ind)
        best = np.argmax(np.abs(R), axis=1)
        r = R[np.arange(R.shape[0]), best]
    return r, np.abs(r)


def rank_features(dataset: Dataset, task: TaskKind | str = TaskKind.BINARY,
                  rows: np.ndarray | None = None) -> RankedFeatures:
    """Rank every feature by |r| with the task's target, descending, ties by name."""
    task = TaskKind.parse(task)
    X = dataset.matrix if rows is None else dataset.matrix[rows]
    y = dataset.labels(task) if rows is None else dataset.labels(task)[rows]
    return rank_matrix(X, y, dataset.feature_names, task, dataset.n_classes(task))


def rank_matrix(X: np.ndarray, y: np.ndarray, names: Sequence[str], task: TaskKind | str = TaskKind.BINARY,
                n_classes: int | None = None) -> RankedFeatures:
    task = TaskKind.parse(task)
    r, score = score_matrix(X, y, task, n_classes)
    var = np.asarray(X, dtype=np.float64).var(axis=0)
    order = sorted(range(len(names)), key=lambda j: (-score[j], names[j]))
    entries = tuple(CorrelationScore(names[j], float(r[j]), float(score[j]), bool(var[j] == 0)) for j in order)
    return RankedFeatures(entries, task)


def select_top(ranked: RankedFeatures, size: int) -> FeatureSubset:
    if not 1 <= size <= len(ranked):
        raise SizeOutOfRange(f"subset size {size} outside 1..{len(ranked)}")
    return FeatureSubset(tuple(ranked.names[:size]), ranked, size)
