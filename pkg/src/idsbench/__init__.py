"""Intrusion-detection benchmark: ingest, correlation ranking, classical and neural
classifiers, and a k-fold / official-split experiment runner."""
from .classifiers import ModelSpec, PredictionBatch, TrainedModel, fit_model, predict
from .data import Dataset, FeatureSchema, TaskKind, validate_dataset
from .experiment import ExperimentConfig, ReportBundle, emit_report, run_experiment
from .features import RankedFeatures, rank_features, select_top
from .ingest import DatasetManifest, load_dataset, load_raw, map_labels
from .metrics import ConfusionMatrix, MetricsReport, compute_metrics, confusion, evaluate
from .persistence import load_model, save_model

__version__ = "0.1.0"

__all__ = [
    "ConfusionMatrix", "Dataset", "DatasetManifest", "ExperimentConfig", "FeatureSchema", "MetricsReport",
    "ModelSpec", "PredictionBatch", "RankedFeatures", "ReportBundle", "TaskKind", "TrainedModel",
    "compute_metrics", "confusion", "emit_report", "evaluate", "fit_model", "load_dataset", "load_model",
    "load_raw", "map_labels", "predict", "rank_features", "run_experiment", "save_model", "select_top",
    "validate_dataset",
]
