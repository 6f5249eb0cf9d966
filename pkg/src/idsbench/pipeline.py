"""A fitted model bundled with the preprocessing it was trained under, so a saved
file can score raw dataset files on its own."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classifiers import ModelSpec, fit_model
from .classifiers.base import PredictionBatch, TrainedModel, register
from .data import Dataset, TaskKind
from .errors import DataError
from .features import rank_features, select_top
from .ingest import DatasetManifest, load_raw, map_labels
from .neural import fit_mlp
from .preprocess import EncodingMap, ScalerParams, apply_scaler, encode_table, fit_scaler


@register
@dataclass
class FittedPipeline(TrainedModel):
    family = "Pipeline"
    task: str = "binary"
    dataset_id: str = ""
    all_features: list = field(default_factory=list)
    selected: list = field(default_factory=list)
    mean: np.ndarray = None
    std: np.ndarray = None
    encoding: dict = field(default_factory=dict)
    class_names: list = field(default_factory=list)
    model: TrainedModel = None

    def transform(self, dataset: Dataset) -> np.ndarray:
        if list(dataset.feature_names) != list(self.all_features):
            raise DataError("dataset columns differ from the ones the model was trained on")
        scaled = apply_scaler(ScalerParams(self.mean, self.std), dataset.matrix)
        cols = [self.all_features.index(n) for n in self.selected]
        return np.ascontiguousarray(scaled[:, cols])

    def predict_dataset(self, dataset: Dataset) -> PredictionBatch:
        return self.model.predict(self.transform(dataset))

    def predict(self, X) -> PredictionBatch:
        return self.model.predict(X)


def load_for_pipeline(pipe: FittedPipeline, manifest: DatasetManifest) -> Dataset:
    """Read files with the pipeline's category codes; unseen categories get a reserved code."""
    table = map_labels(load_raw(manifest), manifest)
    dataset, _ = encode_table(table, EncodingMap.from_dict(pipe.encoding), unseen="reserve")
    return dataset


def fit_pipeline(dataset: Dataset, emap: EncodingMap, spec: ModelSpec, task: TaskKind | str, n_features: int,
                 rows: np.ndarray | None = None) -> FittedPipeline:
    """Scale on ``rows`` (all by default), take the top ``n_features`` by binary
    correlation ranking on those rows, and fit ``spec``."""
    task = TaskKind.parse(task)
    rows = np.arange(dataset.n_rows) if rows is None else np.asarray(rows)
    scaler = fit_scaler(dataset.matrix, rows)
    subset = select_top(rank_features(dataset, TaskKind.BINARY, rows=rows), n_features)
    cols = [dataset.feature_names.index(n) for n in subset.names]
    X = np.ascontiguousarray(apply_scaler(scaler, dataset.matrix)[np.ix_(rows, cols)])
    y = dataset.labels(task)[rows]
    k = dataset.n_classes(task)
    if spec.family == "ANN":
        model = fit_mlp(X, y, n_classes=k, seed=spec.seed, **spec.hyperparams)
    else:
        model = fit_model(spec, X, y, n_classes=k)
    names = list(dataset.class_names) if task is TaskKind.MULTICLASS else ["normal", "attack"]
    return FittedPipeline(n_features=len(cols), n_classes=k, hyperparams={"n_features": n_features},
                          task=task.value, dataset_id=dataset.dataset_id, all_features=list(dataset.feature_names),
                          selected=list(subset.names), mean=scaler.mean, std=scaler.std, encoding=emap.to_dict(),
                          class_names=names, model=model)
