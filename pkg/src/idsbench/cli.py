"""Command line entry point: ``idsbench {ingest,rank,train,evaluate,run,report}``.

Exit status is 0 on success, 1 for configuration problems, 2 for data
problems and 3 for anything else.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .classifiers import ModelSpec
from .data import TaskKind, validate_dataset
from .errors import ConfigError, IdsBenchError
from .experiment import FORMATS, ExperimentConfig, ReportBundle, emit_report, run_experiment
from .features import rank_features
from .ingest import DATASET_IDS, DatasetManifest, load_dataset
from .metrics import evaluate as evaluate_labels
from .persistence import load_model, save_model
from .pipeline import FittedPipeline, fit_pipeline, load_for_pipeline
from .preprocess import official_split

log = logging.getLogger("idsbench")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_data_args(p):
    p.add_argument("--config", help="dataset manifest JSON, or an experiment config that names a dataset")
    p.add_argument("--dataset", choices=DATASET_IDS, help="dataset id when passing files directly")
    p.add_argument("files", nargs="*", help="input files (with --dataset)")


def _manifest(args) -> DatasetManifest:
    if args.config and args.files:
        raise ConfigError("give either --config or --dataset with files, not both")
    if args.config:
        path = Path(args.config)
        try:
            doc = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path} is not valid JSON: {exc}") from None
        if isinstance(doc, dict) and ("dataset" in doc or "manifest" in doc):
            return ExperimentConfig.from_dict(doc, base_dir=path.parent).manifest
        return DatasetManifest.from_json(path)
    if not args.dataset or not args.files:
        raise ConfigError("name the data with --config, or with --dataset and one or more files")
    return DatasetManifest.for_dataset(args.dataset, args.files)


def _write(text: str, out: str | None):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_ingest(args) -> int:
    dataset, emap = load_dataset(_manifest(args))
    report = validate_dataset(dataset)
    labels = dataset.multiclass_labels
    counts = np.bincount(labels, minlength=len(dataset.class_names))
    summary = {
        "dataset_id": dataset.dataset_id,
        "rows": dataset.n_rows,
        "files": dataset.n_files,
        "features": len(dataset.feature_names),
        "nominal_features": {k: len(v) for k, v in emap.categories.items()},
        "binary_counts": {"normal": int((dataset.binary_labels == 0).sum()),
                          "attack": int((dataset.binary_labels == 1).sum())},
        "class_counts": {n: int(c) for n, c in zip(dataset.class_names, counts)},
        "valid": report.ok,
        "problems": list(report.problems),
    }
    _write(json.dumps(summary, indent=2) + "\n", args.out)
    return 0 if report.ok else 2


def cmd_rank(args) -> int:
    dataset, _ = load_dataset(_manifest(args))
    ranked = rank_features(dataset, args.task)
    if args.format == "md":
        lines = ["| Rank | Feature | Score |", "|---|---|---|"]
        lines += [f"| {i} | {n} | {s:.6f} |" for i, n, s in ranked.to_rows()]
        _write("\n".join(lines) + "\n", args.out)
    else:
        _write(ranked.to_csv(), args.out)
    return 0


def _split_rows(dataset, split: str, part: str):
    if split == "official":
        train, test = official_split(dataset)
        return train if part == "train" else test
    return None


def cmd_train(args) -> int:
    if not args.out:
        raise ConfigError("train needs --out for the model file")
    dataset, emap = load_dataset(_manifest(args))
    try:
        hyper = json.loads(args.params) if args.params else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"--params is not valid JSON: {exc}") from None
    spec = ModelSpec(args.model, hyper, args.seed)
    n_features = args.features or len(dataset.feature_names)
    rows = _split_rows(dataset, args.split, "train")
    pipe = fit_pipeline(dataset, emap, spec, args.task, n_features, rows)
    save_model(pipe, args.out)
    log.info("saved %s model on %d features to %s", spec.family, n_features, args.out)
    return 0


def cmd_evaluate(args) -> int:
    pipe = load_model(args.model)
    if not isinstance(pipe, FittedPipeline):
        raise ConfigError(f"{args.model} holds a bare model; evaluate needs a file written by `idsbench train`")
    dataset = load_for_pipeline(pipe, _manifest(args))
    rows = _split_rows(dataset, args.split, "test")
    task = TaskKind.parse(pipe.task)
    pred = pipe.predict_dataset(dataset).labels
    y = dataset.labels(task)
    if rows is not None:
        pred, y = pred[rows], y[rows]
    rep = evaluate_labels(y, pred, max(pipe.n_classes, int(y.max()) + 1))
    s = rep.summary()
    if args.format == "md":
        text = "| Metric | Value |\n|---|---|\n" + "".join(f"| {k} | {v:.6f} |\n" for k, v in s.items())
    else:
        text = "metric,value\n" + "".join(f"{k},{v:.6f}\n" for k, v in s.items())
    _write(text, args.out)
    return 0


def _progress(msg: str):
    log.info(msg)


def cmd_run(args) -> int:
    if not args.config:
        raise ConfigError("run needs --config")
    path = Path(args.config)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("experiment config must be a JSON object")
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.workers is not None:
        doc["workers"] = args.workers
    if args.format:
        doc["formats"] = [args.format]
    if args.out:
        doc["output_dir"] = str(Path(args.out).resolve())
    config = ExperimentConfig.from_dict(doc, base_dir=path.parent)
    if config.output_dir is None:
        raise ConfigError("no output directory: set output_dir in the config or pass --out")
    bundle = run_experiment(config, log=_progress)
    sys.stdout.write(Path(config.output_dir, "accuracy_table.md").read_text() if "md" in config.formats
                     else f"wrote report to {config.output_dir}\n")
    return 0 if all(c.status == "ok" for c in bundle.cells) else 3


def cmd_report(args) -> int:
    src = Path(args.bundle or args.config or "")
    if src.is_dir():
        src = src / "bundle.json"
    if not src.is_file():
        raise ConfigError(f"no report bundle at {src}")
    bundle = ReportBundle.load(src)
    out = Path(args.out) if args.out else src.parent
    formats = [args.format] if args.format else list(FORMATS)
    for p in emit_report(bundle, out, formats):
        sys.stdout.write(f"{p}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="idsbench", description="Intrusion-detection classifier benchmark")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="validate and summarize dataset files")
    _add_data_args(p)
    p.add_argument("--out", help="write the JSON summary here instead of stdout")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("rank", help="emit the correlation feature ranking")
    _add_data_args(p)
    p.add_argument("--task", default="binary", choices=[t.value for t in TaskKind])
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("train", help="fit a single model and save it with its preprocessing")
    _add_data_args(p)
    p.add_argument("--model", required=True, help="model family, e.g. RF, SVM, ANN")
    p.add_argument("--params", help="JSON object of hyperparameter overrides")
    p.add_argument("--features", type=int, help="top-N ranked features (default: all)")
    p.add_argument("--task", default="binary", choices=[t.value for t in TaskKind])
    p.add_argument("--split", default="all", choices=["all", "official"],
                   help="train on every row, or on the published training file only")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="model file (.json or .json.gz)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a saved model on dataset files")
    _add_data_args(p)
    p.add_argument("--model", required=True, help="file written by `idsbench train`")
    p.add_argument("--split", default="all", choices=["all", "official"],
                   help="score every row, or the published test file only")
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("run", help="run a full experiment grid from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--format", choices=FORMATS, help="only this table format (default: both)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="re-emit tables from a finished run")
    p.add_argument("bundle", nargs="?", help="bundle.json or the run's output directory")
    p.add_argument("--config", help="same as the positional argument")
    p.add_argument("--out", help="output directory (default: next to the bundle)")
    p.add_argument("--format", choices=FORMATS)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except IdsBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, MemoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # last resort: keep the documented exit code
        log.debug("unhandled", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
