"""Label encoding, standard scaling and train/test splitting."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .data import Dataset
from .errors import DimensionMismatch, EmptyTrainingSet, SplitUnavailable, TooFewRows, UnseenCategory

UNSEEN_ERROR = "error"
UNSEEN_RESERVE = "reserve"


@dataclass(frozen=True)
class EncodingMap:
    """Per nominal feature, the sorted distinct values; a value's code is its position."""

    categories: dict[str, tuple[str, ...]]

    def codes(self, feature: str) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.categories[feature])}

    def decode(self, feature: str, codes: Sequence[int]) -> list[str]:
        cats = self.categories[feature]
        return [cats[int(c)] for c in codes]

    def to_dict(self) -> dict:
        return {k: list(v) for k, v in self.categories.items()}

    @classmethod
    def from_dict(cls, d: Mapping[str, Sequence[str]]) -> "EncodingMap":
        return cls({k: tuple(v) for k, v in d.items()})


def fit_label_encoding(columns: Mapping[str, Sequence[str]]) -> EncodingMap:
    cats = {}
    for name, values in columns.items():
        cats[name] = tuple(sorted(set(np.asarray(values, dtype=str).tolist())))
    return EncodingMap(cats)


def encode_column(emap: EncodingMap, feature: str, values: Sequence[str], unseen: str = UNSEEN_ERROR) -> np.ndarray:
    cats = emap.categories[feature]
    values = np.asarray(values, dtype=str)
    lookup = np.asarray(cats, dtype=str)
    pos = np.searchsorted(lookup, values) if len(lookup) else np.zeros(len(values), dtype=np.int64)
    pos_c = np.minimum(pos, max(len(lookup) - 1, 0))
    found = (lookup[pos_c] == values) if len(lookup) else np.zeros(len(values), dtype=bool)
    if not found.all():
        if unseen == UNSEEN_RESERVE:
            pos = np.where(found, pos, len(cats))
        else:
            bad = values[~found][0]
            raise UnseenCategory(f"feature {feature!r}: value {bad!r} was not seen when fitting the encoding")
    return pos.astype(np.float64)


def apply_encoding(emap: EncodingMap, table, unseen: str = UNSEEN_ERROR) -> np.ndarray:
    """Encode a table (DataFrame of strings) into a float matrix.

    Columns listed in ``emap`` are mapped to their codes; all other columns are
    parsed as numbers. With ``unseen="reserve"`` an unseen category maps to the
    reserved code ``n`` (one past the last fitted code).
    """
    from .ingest import parse_numeric

    if unseen not in (UNSEEN_ERROR, UNSEEN_RESERVE):
        raise ValueError(f"unknown unseen-category policy {unseen!r}")
    out = np.empty((len(table), len(table.columns)), dtype=np.float64)
    for j, name in enumerate(table.columns):
        col = table[name]
        if name in emap.categories:
            out[:, j] = encode_column(emap, name, col.to_numpy(dtype=str), unseen)
        else:
            out[:, j] = parse_numeric(col, name)
    return out


def encode_table(table, emap: EncodingMap | None = None, unseen: str = UNSEEN_ERROR):
    """Turn a LabeledTable into ``(Dataset, EncodingMap)``.

    The encoding is fitted on every loaded row when ``emap`` is not given;
    codes carry no label information so this does not leak test labels.
    """
    nominal = [f.name for f in table.schema if f.value_kind == "nominal"]
    if emap is None:
        emap = fit_label_encoding({n: table.features[n].to_numpy(dtype=str) for n in nominal})
    matrix = apply_encoding(emap, table.features, unseen)
    ds = Dataset(schema=table.schema, matrix=matrix, binary_labels=table.binary_labels,
                 multiclass_labels=table.multiclass_labels, class_names=table.class_names,
                 source=table.source, dataset_id=table.dataset_id, n_files=table.n_files)
    return ds, emap


@dataclass(frozen=True)
class ScalerParams:
    mean: np.ndarray
    std: np.ndarray

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d) -> "ScalerParams":
        return cls(np.asarray(d["mean"], dtype=np.float64), np.asarray(d["std"], dtype=np.float64))


def fit_scaler(matrix: np.ndarray, rows: np.ndarray | None = None) -> ScalerParams:
    """Per-column mean and population standard deviation over the training rows."""
    X = np.asarray(matrix, dtype=np.float64)
    if rows is not None:
        X = X[rows]
    if X.ndim != 2 or X.shape[0] < 2:
        raise EmptyTrainingSet(f"need at least 2 training rows to fit a scaler, got {X.shape[0] if X.ndim else 0}")
    mean = X.mean(axis=0)
    std = np.sqrt(((X - mean) ** 2).mean(axis=0))
    # a constant column can still show a rounding-level std; pin it to exactly 0
    std[np.ptp(X, axis=0) == 0] = 0.0
    return ScalerParams(mean, std)


def apply_scaler(params: ScalerParams, matrix: np.ndarray) -> np.ndarray:
    X = np.asarray(matrix, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != len(params.mean):
        raise DimensionMismatch(f"scaler fitted on {len(params.mean)} columns, got shape {X.shape}")
    # zero-variance columns map to 0
    safe = np.where(params.std > 0, params.std, 1.0)
    out = (X - params.mean) / safe
    out[:, params.std == 0] = 0.0
    return out


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: np.ndarray
    seed: int

    def split(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Iteration ``i``: fold ``i`` is the test set, all other folds train."""
        if not 0 <= i < self.k:
            raise IndexError(f"fold {i} out of range for k={self.k}")
        test = np.flatnonzero(self.assignments == i)
        train = np.flatnonzero(self.assignments != i)
        return train, test

    def __iter__(self):
        return (self.split(i) for i in range(self.k))

    def fold_sizes(self) -> np.ndarray:
        return np.bincount(self.assignments, minlength=self.k)


def make_kfold(n_rows: int, k: int = 5, seed: int = 0) -> FoldPlan:
    """Seeded shuffle, then round-robin fold assignment (fold sizes differ by at most one)."""
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if n_rows < k:
        raise TooFewRows(f"cannot build {k} folds from {n_rows} rows")
    order = np.random.default_rng(seed).permutation(n_rows)
    assignments = np.empty(n_rows, dtype=np.int64)
    assignments[order] = np.arange(n_rows) % k
    return FoldPlan(k=k, assignments=assignments, seed=seed)


def official_split(dataset: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Rows from the first file train, rows from the second file test."""
    if dataset.n_files != 2:
        raise SplitUnavailable(
            f"official split needs the published train/test file pair, dataset was loaded from {dataset.n_files} file(s)")
    train = np.flatnonzero(dataset.source == 0)
    test = np.flatnonzero(dataset.source == 1)
    if not len(train) or not len(test):
        raise SplitUnavailable("one of the two split files contributed no rows")
    return train, test


def stratified_subsample(y: np.ndarray, cap: int, seed: int) -> np.ndarray:
    """Seeded, class-proportional row subsample of size ``cap`` (sorted indices).

    Every class present keeps at least one row.
    """
    y = np.asarray(y)
    n = len(y)
    if cap >= n:
        return np.arange(n)
    rng = np.random.default_rng(seed)
    classes, counts = np.unique(y, return_counts=True)
    quota = np.maximum(1, np.floor(counts * cap / n).astype(np.int64))
    # hand out the remainder to the largest fractional parts, deterministically
    short = cap - quota.sum()
    if short > 0:
        frac = counts * cap / n - np.floor(counts * cap / n)
        for j in np.argsort(-frac, kind="stable")[:short]:
            quota[j] += 1
    picked = []
    for c, q in zip(classes, quota):
        idx = np.flatnonzero(y == c)
        picked.append(rng.choice(idx, size=min(q, len(idx)), replace=False))
    return np.sort(np.concatenate(picked))
