"""Versioned JSON documents for fitted models (gzip when the path ends in ``.gz``)."""
from __future__ import annotations

import gzip
import json
from pathlib import Path

from . import classifiers, neural, pipeline  # noqa: F401  (importing registers every model class)
from .classifiers.base import TrainedModel, decode, encode
from .errors import CorruptFile, MissingFile, VersionMismatch

FORMAT = "idsbench-model"
FORMAT_VERSION = 1


def model_to_dict(model: TrainedModel) -> dict:
    return {"format": FORMAT, "version": FORMAT_VERSION, "family": model.family, "model": encode(model)}


def model_from_dict(doc: dict) -> TrainedModel:
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise CorruptFile("not a saved model document")
    if doc.get("version") != FORMAT_VERSION:
        raise VersionMismatch(f"model format version {doc.get('version')!r}, this build reads {FORMAT_VERSION}")
    try:
        model = decode(doc["model"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptFile(f"model document is damaged: {exc}") from exc
    if not isinstance(model, TrainedModel) or model.family != doc.get("family"):
        raise CorruptFile("family tag does not match the stored parameters")
    return model


def dumps(model: TrainedModel) -> str:
    # repr-based float output in json round-trips every float64 exactly
    return json.dumps(model_to_dict(model), sort_keys=True, allow_nan=True)


def loads(text: str) -> TrainedModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptFile(f"invalid JSON: {exc}") from exc
    return model_from_dict(doc)


def save_model(model: TrainedModel, path) -> Path:
    path = Path(path)
    data = dumps(model).encode()
    if path.suffix == ".gz":
        data = gzip.compress(data, mtime=0)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    return path


def load_model(path) -> TrainedModel:
    path = Path(path)
    if not path.exists():
        raise MissingFile(f"no model file at {path}")
    data = path.read_bytes()
    if data[:2] == b"\x1f\x8b":
        try:
            data = gzip.decompress(data)
        except (OSError, EOFError) as exc:
            raise CorruptFile(f"{path}: truncated gzip stream") from exc
    try:
        text = data.decode()
    except UnicodeDecodeError as exc:
        raise CorruptFile(f"{path}: not UTF-8 text") from exc
    return loads(text)
