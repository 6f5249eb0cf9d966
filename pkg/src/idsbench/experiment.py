"""Declarative experiment grid: ingest, scale, rank, fit and score every
(model, feature-subset size, fold) cell, then write the report files."""
from __future__ import annotations

import csv
import io
import json
import multiprocessing as mp
import multiprocessing.connection
import time
import traceback
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .classifiers import ModelSpec, fit_model
from .data import Dataset, TaskKind
from .errors import ConfigError, IdsBenchError, IOFailure, SizeOutOfRange
from .features import RankedFeatures, rank_features, select_top
from .ingest import DatasetManifest, load_dataset
from .metrics import ConfusionMatrix, MetricsReport, compute_metrics, confusion
from .neural import MLPConfig, TrainingCurve, fit_mlp
from .preprocess import apply_scaler, fit_scaler, make_kfold, official_split

CONFIG_VERSION = 1
DEFAULT_TIMEOUT_MINUTES = 30.0
STATUS_OK = "ok"
STATUS_TIMED_OUT = "timed_out"
FORMATS = ("csv", "md")


class CellFailed(IdsBenchError):
    """A grid cell raised; carries the cell context and the original exit code."""

    def __init__(self, message: str, exit_code: int = 3):
        super().__init__(message)
        self.exit_code = exit_code


# -- configuration -------------------------------------------------------------

@dataclass
class ExperimentConfig:
    manifest: DatasetManifest
    task: TaskKind
    feature_sizes: list[int]
    models: list[ModelSpec]
    split: str = "kfold"          # "kfold" or "official"
    k: int = 5
    seed: int = 0
    output_dir: str | None = None
    svm_cap: int = 20_000
    workers: int = 1
    timeout_minutes: float | None = DEFAULT_TIMEOUT_MINUTES
    ranking_task: str = "binary"  # "binary" or "task"
    formats: tuple = FORMATS

    def __post_init__(self):
        self.task = TaskKind.parse(self.task)
        if not self.models:
            raise ConfigError("experiment lists no models")
        if not self.feature_sizes:
            raise ConfigError("experiment lists no feature subset sizes")
        sizes = [int(s) for s in self.feature_sizes]
        if any(s < 1 for s in sizes) or len(set(sizes)) != len(sizes):
            raise ConfigError(f"feature sizes must be distinct positive integers, got {self.feature_sizes}")
        self.feature_sizes = sizes
        if self.split not in ("kfold", "official"):
            raise ConfigError(f"split must be 'kfold' or 'official', got {self.split!r}")
        if self.split == "kfold" and self.k < 2:
            raise ConfigError("k-fold needs k >= 2")
        if self.ranking_task not in ("binary", "task"):
            raise ConfigError("ranking must be 'binary' or 'task'")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.timeout_minutes is not None and self.timeout_minutes <= 0:
            raise ConfigError("timeout must be positive (or null for none)")
        if self.svm_cap < 2:
            raise ConfigError("svm_cap must be >= 2")
        bad = [f for f in self.formats if f not in FORMATS]
        if bad:
            raise ConfigError(f"unknown report format(s) {bad}")
        self.formats = tuple(self.formats)
        names = [m.family for m in self.models]
        if len(set(names)) != len(names):
            raise ConfigError("each model family may appear only once")
        for m in self.models:
            if m.family == "ANN":
                allowed = set(MLPConfig.__dataclass_fields__) - {"input_dim", "n_outputs", "seed"}
                unknown = set(m.hyperparams) - allowed
                if unknown:
                    raise ConfigError(f"ANN has no hyperparameter(s) {sorted(unknown)}")

    @property
    def protocol(self) -> str:
        return f"kfold-{self.k}" if self.split == "kfold" else "official"

    @property
    def rank_task(self) -> TaskKind:
        return TaskKind.BINARY if self.ranking_task == "binary" else self.task

    @classmethod
    def from_dict(cls, d: dict, base_dir: str | Path | None = None) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("experiment config must be a JSON object")
        d = dict(d)
        version = d.pop("version", CONFIG_VERSION)
        if version != CONFIG_VERSION:
            raise ConfigError(f"config version {version!r} is not supported")
        base = Path(base_dir) if base_dir is not None else Path.cwd()
        known = {"dataset", "manifest", "task", "feature_sizes", "models", "split", "seed", "output_dir",
                 "svm_cap", "workers", "timeout_minutes", "ranking", "formats"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config key(s) {sorted(unknown)}")
        manifest = _manifest(d, base)
        split, k = _split(d.get("split"), manifest)
        models = [_model_spec(m) for m in d.get("models") or []]
        out = d.get("output_dir")
        if out is not None and not Path(out).is_absolute():
            out = str(base / out)
        try:
            return cls(manifest=manifest, task=d.get("task", "binary"),
                       feature_sizes=list(d.get("feature_sizes") or []), models=models, split=split, k=k,
                       seed=int(d.get("seed", 0)), output_dir=out, svm_cap=int(d.get("svm_cap", 20_000)),
                       workers=int(d.get("workers", 1)),
                       timeout_minutes=d.get("timeout_minutes", DEFAULT_TIMEOUT_MINUTES),
                       ranking_task=d.get("ranking", "binary"), formats=tuple(d.get("formats", FORMATS)))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, IdsBenchError):
                raise
            raise ConfigError(f"bad experiment config: {exc}") from None

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        try:
            d = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        return cls.from_dict(d, base_dir=path.parent)

    def to_dict(self) -> dict:
        """Fully resolved form; feeding it back to :meth:`from_dict` replays the run."""
        m = self.manifest.to_dict()
        m["file_paths"] = [str(Path(p).resolve()) for p in m["file_paths"]]
        return {
            "version": CONFIG_VERSION,
            "dataset": m,
            "task": self.task.value,
            "split": {"kind": "kfold", "k": self.k} if self.split == "kfold" else {"kind": "official"},
            "feature_sizes": list(self.feature_sizes),
            "models": [{"family": s.family, "hyperparams": dict(s.hyperparams)} for s in self.models],
            "seed": self.seed,
            "output_dir": None if self.output_dir is None else str(Path(self.output_dir).resolve()),
            "svm_cap": self.svm_cap,
            "workers": self.workers,
            "timeout_minutes": self.timeout_minutes,
            "ranking": self.ranking_task,
            "formats": list(self.formats),
        }


def _manifest(d: dict, base: Path) -> DatasetManifest:
    if "dataset" in d and "manifest" in d:
        raise ConfigError("give either 'dataset' or 'manifest', not both")
    if "manifest" in d:
        ref = d["manifest"]
        if isinstance(ref, str):
            p = Path(ref) if Path(ref).is_absolute() else base / ref
            return DatasetManifest.from_json(p)
        spec = ref
    elif "dataset" in d:
        spec = d["dataset"]
    else:
        raise ConfigError("config needs a 'dataset' (or 'manifest') entry")
    if not isinstance(spec, dict) or "dataset_id" not in spec:
        raise ConfigError("dataset entry needs a dataset_id and file_paths")
    spec = dict(spec)
    paths = spec.pop("file_paths", None) or []
    if isinstance(paths, str):
        paths = [paths]
    paths = [str(Path(p) if Path(p).is_absolute() else base / p) for p in paths]
    try:
        return DatasetManifest.for_dataset(spec.pop("dataset_id"), paths, **spec)
    except TypeError as exc:
        raise ConfigError(f"bad dataset entry: {exc}") from None


def _split(s, manifest: DatasetManifest) -> tuple[str, int]:
    if s is None:
        # published train/test pair -> official split, anything else -> 5 folds
        return ("official", 5) if len(manifest.file_paths) == 2 else ("kfold", 5)
    if isinstance(s, str):
        kind, k = s, 5
    elif isinstance(s, dict):
        kind, k = s.get("kind", "kfold"), s.get("k", 5)
    else:
        raise ConfigError(f"bad split entry {s!r}")
    if kind not in ("kfold", "official"):
        raise ConfigError(f"split kind must be 'kfold' or 'official', got {kind!r}")
    if not isinstance(k, int) or isinstance(k, bool):
        raise ConfigError("split k must be an integer")
    return kind, k


def _model_spec(m) -> ModelSpec:
    if isinstance(m, str):
        return ModelSpec(m)
    if isinstance(m, dict) and "family" in m:
        extra = set(m) - {"family", "hyperparams"}
        if extra:
            raise ConfigError(f"unknown model key(s) {sorted(extra)}")
        return ModelSpec(m["family"], dict(m.get("hyperparams") or {}))
    raise ConfigError(f"bad model entry {m!r}")


# -- results ---------------------------------------------------------------------

@dataclass
class CellResult:
    model: str
    size: int
    fold: int
    status: str
    seed: int
    confusion: np.ndarray | None = None
    n_train: int = 0
    n_test: int = 0
    fit_seconds: float = 0.0
    predict_seconds: float = 0.0
    subsampled: bool = False
    converged: bool = True
    curve: TrainingCurve | None = None

    @property
    def report(self) -> MetricsReport | None:
        if self.confusion is None:
            return None
        return compute_metrics(ConfusionMatrix(self.confusion))

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in ("model", "size", "fold", "status", "seed", "n_train", "n_test",
                                            "fit_seconds", "predict_seconds", "subsampled", "converged")}
        d["confusion"] = None if self.confusion is None else self.confusion.tolist()
        d["curve"] = None if self.curve is None else {
            "train_loss": self.curve.train_loss, "train_acc": self.curve.train_acc,
            "val_loss": self.curve.val_loss, "val_acc": self.curve.val_acc}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CellResult":
        d = dict(d)
        if d.get("confusion") is not None:
            d["confusion"] = np.asarray(d["confusion"], dtype=np.int64)
        if d.get("curve") is not None:
            d["curve"] = TrainingCurve(**d["curve"])
        return cls(**d)


@dataclass
class TableRow:
    model: str
    size: int
    status: str
    folds: int
    accuracy: float
    precision: float
    recall: float
    f1: float
    subsampled: bool


@dataclass
class ReportBundle:
    config: ExperimentConfig
    ranking: RankedFeatures
    cells: list[CellResult]
    metadata: dict[str, Any] = field(default_factory=dict)

    def cell(self, model: str, size: int, fold: int) -> CellResult:
        for c in self.cells:
            if (c.model, c.size, c.fold) == (model, size, fold):
                return c
        raise KeyError((model, size, fold))

    def rows(self) -> list[TableRow]:
        """One row per (model, size): metrics averaged over the folds that finished."""
        out = []
        for spec in self.config.models:
            for size in self.config.feature_sizes:
                cells = [c for c in self.cells if c.model == spec.family and c.size == size]
                done = [c for c in cells if c.status == STATUS_OK]
                status = STATUS_OK if len(done) == len(cells) else STATUS_TIMED_OUT
                if done:
                    reps = [c.report for c in done]
                    vals = [float(np.mean([r.accuracy for r in reps]))]
                    vals += [float(np.mean([r.weighted[m] for r in reps])) for m in ("precision", "recall", "f1")]
                else:
                    vals = [float("nan")] * 4
                out.append(TableRow(spec.family, size, status, len(done), *vals,
                                    subsampled=any(c.subsampled for c in cells)))
        return out

    def accuracy(self, model: str, size: int) -> float:
        for r in self.rows():
            if r.model == model and r.size == size:
                return r.accuracy
        raise KeyError((model, size))

    def row(self, model: str, size: int) -> TableRow:
        for r in self.rows():
            if r.model == model and r.size == size:
                return r
        raise KeyError((model, size))

    def to_dict(self) -> dict:
        return {"version": CONFIG_VERSION, "config": self.config.to_dict(), "ranking": self.ranking.to_dict(),
                "cells": [c.to_dict() for c in self.cells], "metadata": self.metadata}

    @classmethod
    def from_dict(cls, d: dict) -> "ReportBundle":
        try:
            config = ExperimentConfig.from_dict(d["config"])
            return cls(config, RankedFeatures.from_dict(d["ranking"]),
                       [CellResult.from_dict(c) for c in d["cells"]], d.get("metadata", {}))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"not a report bundle: {exc}") from None

    @classmethod
    def load(cls, path: str | Path) -> "ReportBundle":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except OSError as exc:
            raise ConfigError(f"cannot read bundle {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bundle {path} is not valid JSON: {exc}") from None


# -- running ---------------------------------------------------------------------

def cell_seed(seed: int, family: str, size: int, fold: int) -> int:
    ss = np.random.SeedSequence([seed, zlib.crc32(family.encode()), size, fold])
    return int(ss.generate_state(1)[0])


@dataclass
class _FoldData:
    fold: int
    train: np.ndarray
    test: np.ndarray
    scaled: np.ndarray
    ranking: RankedFeatures


def _splits(config: ExperimentConfig, dataset: Dataset) -> list[tuple[np.ndarray, np.ndarray]]:
    if config.split == "official":
        return [official_split(dataset)]
    return list(make_kfold(dataset.n_rows, config.k, config.seed))


def _prepare_fold(config: ExperimentConfig, dataset: Dataset, fold: int, train, test) -> _FoldData:
    scaler = fit_scaler(dataset.matrix, train)
    ranking = rank_features(dataset, config.rank_task, rows=train)
    return _FoldData(fold, train, test, apply_scaler(scaler, dataset.matrix), ranking)


def _fit_predict(spec: ModelSpec, Xtr, ytr, Xte, n_classes: int, seed: int, svm_cap: int) -> dict:
    """Fit on the classes present in training, predict, and map labels back."""
    present = np.unique(ytr)
    remap = np.searchsorted(present, ytr)
    t0 = time.perf_counter()
    curve = None
    if spec.family == "ANN":
        model = fit_mlp(Xtr, remap, n_classes=len(present), seed=seed, **spec.hyperparams)
        curve = model.curve
    else:
        hp = dict(spec.hyperparams)
        if spec.family == "SVM":
            hp.setdefault("cap", svm_cap)
        model = fit_model(ModelSpec(spec.family, hp, seed), Xtr, remap, n_classes=len(present))
    t1 = time.perf_counter()
    pred = present[model.predict(Xte).labels]
    t2 = time.perf_counter()
    return {"pred": pred, "fit_seconds": t1 - t0, "predict_seconds": t2 - t1,
            "subsampled": bool(getattr(model, "subsampled", False)),
            "converged": bool(getattr(model, "converged", True)), "curve": curve}


def _run_cell(config: ExperimentConfig, dataset: Dataset, fd: _FoldData, spec: ModelSpec, size: int) -> CellResult:
    cols = [dataset.feature_names.index(n) for n in select_top(fd.ranking, size).names]
    y = dataset.labels(config.task)
    k = dataset.n_classes(config.task)
    seed = cell_seed(config.seed, spec.family, size, fd.fold)
    Xtr = np.ascontiguousarray(fd.scaled[np.ix_(fd.train, cols)])
    Xte = np.ascontiguousarray(fd.scaled[np.ix_(fd.test, cols)])
    out = _fit_predict(spec, Xtr, y[fd.train], Xte, k, seed, config.svm_cap)
    cm = confusion(y[fd.test], out["pred"], k)
    return CellResult(spec.family, size, fd.fold, STATUS_OK, seed, cm.counts, len(fd.train), len(fd.test),
                      out["fit_seconds"], out["predict_seconds"], out["subsampled"], out["converged"],
                      out["curve"])


def _context(spec: ModelSpec, size: int, fold: int) -> str:
    return f"cell (model={spec.family}, size={size}, fold={fold})"


def _child(conn, config, dataset, fd, spec, size):
    try:
        conn.send(("ok", _run_cell(config, dataset, fd, spec, size)))
    except BaseException as exc:  # report everything to the parent
        code = getattr(exc, "exit_code", 3)
        conn.send(("error", (type(exc).__name__, str(exc), code, traceback.format_exc())))
    finally:
        conn.close()


def _run_grid(config: ExperimentConfig, dataset: Dataset, splits, log) -> list[CellResult]:
    jobs = [(fold, spec, size) for fold in range(len(splits)) for spec in config.models
            for size in config.feature_sizes]
    results: dict[tuple, CellResult] = {}
    timeout = None if config.timeout_minutes is None else 60.0 * config.timeout_minutes
    fd = None

    def fold_data(fold):
        nonlocal fd
        if fd is None or fd.fold != fold:
            fd = _prepare_fold(config, dataset, fold, *splits[fold])
        return fd

    if config.workers == 1 and timeout is None:
        for fold, spec, size in jobs:
            log(f"running {_context(spec, size, fold)}")
            try:
                results[(fold, spec.family, size)] = _run_cell(config, dataset, fold_data(fold), spec, size)
            except Exception as exc:
                raise CellFailed(f"{_context(spec, size, fold)} failed: {type(exc).__name__}: {exc}",
                                 getattr(exc, "exit_code", 3)) from exc
        return [results[(f, s.family, z)] for f, s, z in jobs]

    ctx = mp.get_context("fork")
    pending = list(jobs)
    running: dict[tuple, tuple] = {}
    try:
        while pending or running:
            while pending and len(running) < config.workers:
                fold, spec, size = pending.pop(0)
                recv, send = ctx.Pipe(duplex=False)
                p = ctx.Process(target=_child, args=(send, config, dataset, fold_data(fold), spec, size),
                                daemon=True)
                p.start()
                send.close()
                log(f"started {_context(spec, size, fold)}")
                running[(fold, spec.family, size)] = (p, recv, time.monotonic(), spec)
            finished = multiprocessing.connection.wait([r[1] for r in running.values()], timeout=0.5)
            now = time.monotonic()
            for key, (p, recv, started, spec) in list(running.items()):
                fold, _, size = key
                if recv in finished:
                    try:
                        status, payload = recv.recv()
                    except EOFError:
                        status, payload = "error", ("ProcessDied", f"worker exited with code {p.exitcode}", 3, "")
                    p.join()
                    recv.close()
                    del running[key]
                    if status == "error":
                        name, msg, code, tb = payload
                        raise CellFailed(f"{_context(spec, size, fold)} failed: {name}: {msg}\n{tb}", code)
                    results[key] = payload
                elif timeout is not None and now - started > timeout:
                    p.kill()
                    p.join()
                    recv.close()
                    del running[key]
                    log(f"timed out {_context(spec, size, fold)} after {timeout:.0f}s")
                    results[key] = CellResult(spec.family, size, fold, STATUS_TIMED_OUT,
                                              cell_seed(config.seed, spec.family, size, fold),
                                              n_train=len(splits[fold][0]), n_test=len(splits[fold][1]),
                                              fit_seconds=timeout)
    finally:
        for p, recv, _, _ in running.values():
            p.kill()
            p.join()
            recv.close()
    return [results[(f, s.family, z)] for f, s, z in jobs]


def run_experiment(config: ExperimentConfig, dataset: Dataset | None = None, log=None) -> ReportBundle:
    """Execute the full grid and, when ``config.output_dir`` is set, write the report there.

    ``dataset`` may be passed pre-loaded (it must come from ``config.manifest``).
    """
    log = log or (lambda msg: None)
    t0 = time.perf_counter()
    if dataset is None:
        dataset, _ = load_dataset(config.manifest)
    t_load = time.perf_counter() - t0
    n_feat = len(dataset.feature_names)
    too_big = [s for s in config.feature_sizes if s > n_feat]
    if too_big:
        raise SizeOutOfRange(f"feature sizes {too_big} exceed the {n_feat} encoded features")
    splits = _splits(config, dataset)
    ranking = rank_features(dataset, config.rank_task)
    cells = _run_grid(config, dataset, splits, log)
    meta = {
        "dataset_id": dataset.dataset_id,
        "n_rows": dataset.n_rows,
        "n_features": n_feat,
        "n_files": dataset.n_files,
        "task": config.task.value,
        "n_classes": dataset.n_classes(config.task),
        "class_names": list(dataset.class_names) if config.task is TaskKind.MULTICLASS else ["normal", "attack"],
        "protocol": config.protocol,
        "fold_sizes": [[int(len(a)), int(len(b))] for a, b in splits],
        "ranking_task": config.rank_task.value,
        "load_seconds": t_load,
        "total_seconds": time.perf_counter() - t0,
        "cells": [{"model": c.model, "size": c.size, "fold": c.fold, "status": c.status, "seed": c.seed,
                   "fit_seconds": c.fit_seconds, "predict_seconds": c.predict_seconds,
                   "subsampled": c.subsampled, "converged": c.converged} for c in cells],
    }
    bundle = ReportBundle(config, ranking, cells, meta)
    if config.output_dir is not None:
        out = Path(config.output_dir)
        emit_report(bundle, out, config.formats)
        (out / "bundle.json").write_text(json.dumps(bundle.to_dict(), sort_keys=True, indent=1))
    return bundle


# -- reports ---------------------------------------------------------------------

def _fmt(v: float) -> str:
    return "" if v != v else f"{v:.6f}"


def _pct(row: TableRow) -> str:
    if row.status != STATUS_OK:
        return "timed out" if not row.folds else f"{100 * row.accuracy:.2f}*"
    return f"{100 * row.accuracy:.2f}"


def results_csv(bundle: ReportBundle) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["model", "feature_size", "protocol", "folds", "status", "accuracy", "precision", "recall", "f1",
                "subsampled"])
    for r in bundle.rows():
        w.writerow([r.model, r.size, bundle.config.protocol, r.folds, r.status, _fmt(r.accuracy),
                    _fmt(r.precision), _fmt(r.recall), _fmt(r.f1), str(r.subsampled).lower()])
    return buf.getvalue()


def folds_csv(bundle: ReportBundle) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["model", "feature_size", "fold", "status", "seed", "n_train", "n_test", "accuracy", "precision",
                "recall", "f1", "subsampled"])
    for c in bundle.cells:
        rep = c.report
        vals = [rep.accuracy, *(rep.weighted[m] for m in ("precision", "recall", "f1"))] if rep else [float("nan")] * 4
        w.writerow([c.model, c.size, c.fold, c.status, c.seed, c.n_train, c.n_test, *map(_fmt, vals),
                    str(c.subsampled).lower()])
    return buf.getvalue()


def accuracy_grid(bundle: ReportBundle) -> list[list[str]]:
    """Header row plus one row per model: accuracy (%) at each subset size."""
    rows = {(r.model, r.size): r for r in bundle.rows()}
    sizes = bundle.config.feature_sizes
    grid = [["model", *[str(s) for s in sizes]]]
    for spec in bundle.config.models:
        flag = " (subsampled)" if any(rows[(spec.family, s)].subsampled for s in sizes) else ""
        grid.append([spec.family + flag, *[_pct(rows[(spec.family, s)]) for s in sizes]])
    return grid


def accuracy_table_csv(bundle: ReportBundle) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(accuracy_grid(bundle))
    return buf.getvalue()


def accuracy_table_md(bundle: ReportBundle) -> str:
    grid = accuracy_grid(bundle)
    head = ["Model", *[f"top-{s}" for s in grid[0][1:]]]
    lines = [f"Accuracy (%), {bundle.config.task.value}, {bundle.config.protocol}", "",
             "| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
    lines += ["| " + " | ".join(r) + " |" for r in grid[1:]]
    if any(r.status != STATUS_OK for r in bundle.rows()):
        lines += ["", "`*` some folds timed out; the value averages the folds that finished."]
    return "\n".join(lines) + "\n"


def curve_files(bundle: ReportBundle) -> dict[str, str]:
    return {f"{c.model}_top{c.size}_fold{c.fold}.csv": c.curve.to_csv() for c in bundle.cells if c.curve is not None}


def emit_report(bundle: ReportBundle, out_dir: str | Path, formats: Sequence[str] = FORMATS) -> list[Path]:
    """Write tables in the requested formats, curve CSVs, the ranking, the run manifest and metadata."""
    bad = [f for f in formats if f not in FORMATS]
    if bad:
        raise ConfigError(f"unknown report format(s) {bad}")
    out = Path(out_dir)
    files: dict[str, str] = {}
    if "csv" in formats:
        files["results.csv"] = results_csv(bundle)
        files["folds.csv"] = folds_csv(bundle)
        files["accuracy_table.csv"] = accuracy_table_csv(bundle)
    if "md" in formats:
        files["accuracy_table.md"] = accuracy_table_md(bundle)
    files["ranking.csv"] = bundle.ranking.to_csv()
    files.update({f"curves/{name}": text for name, text in curve_files(bundle).items()})
    files["run_manifest.json"] = json.dumps(bundle.config.to_dict(), sort_keys=True, indent=1) + "\n"
    files["metadata.json"] = json.dumps(bundle.metadata, sort_keys=True, indent=1) + "\n"
    written = []
    try:
        for name, text in files.items():
            path = out / name
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
            written.append(path)
    except OSError as exc:
        raise IOFailure(f"cannot write report to {out}: {exc}") from exc
    return written
