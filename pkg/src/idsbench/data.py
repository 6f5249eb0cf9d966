"""Shared dataset types: column schemas, encoded feature matrices and label vectors."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

VALUE_KINDS = ("nominal", "integer", "real", "binary", "timestamp")


class TaskKind(str, enum.Enum):
    BINARY = "binary"
    MULTICLASS = "multiclass"

    @classmethod
    def parse(cls, value: "str | TaskKind") -> "TaskKind":
        if isinstance(value, TaskKind):
            return value
        return cls(str(value).strip().lower())


@dataclass(frozen=True)
class FeatureSchema:
    name: str
    value_kind: str
    index: int

    def __post_init__(self):
        if self.value_kind not in VALUE_KINDS:
            raise ValueError(f"unknown value kind {self.value_kind!r} for {self.name}")


def make_schema(columns: Sequence[tuple[str, str]]) -> list[FeatureSchema]:
    """Build a contiguous schema from ``(name, kind)`` pairs."""
    return [FeatureSchema(name, kind, i) for i, (name, kind) in enumerate(columns)]


def _readonly(a: np.ndarray, dtype) -> np.ndarray:
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Encoded feature matrix plus both label views.

    Arrays are copied and frozen on construction; downstream code never mutates
    a Dataset. ``source`` tags each row with the index of the file it came from
    (used by the official train/test split).
    """

    schema: tuple[FeatureSchema, ...]
    matrix: np.ndarray
    binary_labels: np.ndarray
    multiclass_labels: np.ndarray
    class_names: tuple[str, ...]
    source: np.ndarray | None = None
    dataset_id: str = ""
    n_files: int = 1

    def __post_init__(self):
        object.__setattr__(self, "schema", tuple(self.schema))
        object.__setattr__(self, "class_names", tuple(self.class_names))
        object.__setattr__(self, "matrix", _readonly(self.matrix, np.float64))
        object.__setattr__(self, "binary_labels", _readonly(self.binary_labels, np.int64))
        object.__setattr__(self, "multiclass_labels", _readonly(self.multiclass_labels, np.int64))
        src = self.source
        if src is None:
            src = np.zeros(len(self.binary_labels), dtype=np.int64)
        object.__setattr__(self, "source", _readonly(src, np.int64))

    @property
    def feature_names(self) -> list[str]:
        return [f.name for f in self.schema]

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    def labels(self, task: TaskKind | str) -> np.ndarray:
        task = TaskKind.parse(task)
        return self.binary_labels if task is TaskKind.BINARY else self.multiclass_labels

    def n_classes(self, task: TaskKind | str) -> int:
        return 2 if TaskKind.parse(task) is TaskKind.BINARY else len(self.class_names)

    def columns(self, names: Sequence[str]) -> np.ndarray:
        lookup = {f.name: f.index for f in self.schema}
        missing = [n for n in names if n not in lookup]
        if missing:
            raise KeyError(f"unknown features: {missing}")
        return self.matrix[:, [lookup[n] for n in names]]


@dataclass
class ValidationReport:
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems

    def __bool__(self):
        return self.ok

    def __str__(self):
        return "valid" if self.ok else "\n".join(self.problems)


def validate_dataset(d: Dataset, max_listed: int = 20) -> ValidationReport:
    """Check the Dataset invariants without touching ``d``.

    At most ``max_listed`` offending cells/rows are named per problem kind.
    """
    problems: list[str] = []

    names = [f.name for f in d.schema]
    if len(set(names)) != len(names):
        dup = sorted({n for n in names if names.count(n) > 1})
        problems.append(f"duplicate feature names: {dup}")
    if [f.index for f in d.schema] != list(range(len(d.schema))):
        problems.append("schema indices are not contiguous from 0")

    if d.matrix.ndim != 2:
        problems.append(f"matrix must be 2-D, got shape {d.matrix.shape}")
        return ValidationReport(problems)
    n, m = d.matrix.shape
    if m != len(d.schema):
        problems.append(f"matrix has {m} columns but schema has {len(d.schema)} features")
    for label_name, vec in (("binary_labels", d.binary_labels), ("multiclass_labels", d.multiclass_labels),
                            ("source", d.source)):
        if len(vec) != n:
            problems.append(f"{label_name} has length {len(vec)}, matrix has {n} rows")

    bad_r, bad_c = np.nonzero(~np.isfinite(d.matrix))
    for r, c in list(zip(bad_r, bad_c))[:max_listed]:
        col = names[c] if c < len(names) else str(c)
        problems.append(f"non-finite value at row {r}, col {c} ({col})")

    if len(d.binary_labels) == n:
        bad = np.flatnonzero((d.binary_labels != 0) & (d.binary_labels != 1))
        for r in bad[:max_listed]:
            problems.append(f"binary label {d.binary_labels[r]} at row {r} is not 0/1")

    if len(d.multiclass_labels) == n:
        k = len(d.class_names)
        bad = np.flatnonzero((d.multiclass_labels < 0) | (d.multiclass_labels >= k))
        for r in bad[:max_listed]:
            problems.append(f"multiclass label {d.multiclass_labels[r]} at row {r} is out of range for {k} classes")
        if len(d.binary_labels) == n and not len(bad):
            mismatch = np.flatnonzero((d.binary_labels == 0) != (d.multiclass_labels == 0))
            for r in mismatch[:max_listed]:
                problems.append(f"row {r}: binary label and class index disagree on normal traffic")

    if d.class_names and d.class_names[0] != "Normal":
        problems.append(f"class index 0 must be 'Normal', got {d.class_names[0]!r}")

    return ValidationReport(problems)
