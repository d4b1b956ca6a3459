"""Command-line entry point: synth, train, evaluate, predict, importance."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, IoFailure, ModelError
from .features import permutation_importance
from .flows import impute_missing, parse_conn_log_file
from .metrics import compute_metrics, confusion, metrics_to_json
from .persist import load_bundle
from .pipeline import ExperimentConfig, read_labeled_dir, run_training
from .synth import SynthSpec, write_synth_dataset

log = logging.getLogger("iotids")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_MODEL = 4


def _setup_logging() -> None:
    level = os.environ.get("IDS_LOG_LEVEL", "info").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    if level not in levels:
        raise ConfigError(f"IDS_LOG_LEVEL must be one of {sorted(levels)}, got {level!r}")
    logging.basicConfig(level=levels[level], format="%(levelname)s %(name)s: %(message)s")


def _cmd_synth(args: argparse.Namespace) -> int:
    spec = SynthSpec.from_json_file(args.spec)
    path = write_synth_dataset(spec, args.out)
    log.info("wrote %s", path)
    return EXIT_OK


def _cmd_train(args: argparse.Namespace) -> int:
    config = ExperimentConfig.from_json_file(args.config)
    data = args.data or config.paths.get("data")
    if not data:
        raise ConfigError("no data path: pass --data or set paths.data in the config")
    out = args.out or config.paths.get("out")
    if not out:
        raise ConfigError("no output path: pass --out or set paths.out in the config")
    cidr = args.cidr or config.paths.get("cidr")
    result = run_training(config, data, out, cidr)
    log.info("wrote %s", result.manifest_path)
    return EXIT_OK


def _labeled_task_rows(bundle, data_path):
    """(records, targets) for the bundle's task; sentinel rows dropped."""
    from .flows import class_index

    dataset = read_labeled_dir(data_path)
    records, targets = [], []
    for flow in dataset.rows:
        c = class_index(flow, bundle.task)
        if c is not None:
            records.append(flow.record)
            targets.append(c)
    return records, np.asarray(targets, dtype=np.int64)


def _cmd_evaluate(args: argparse.Namespace) -> int:
    bundle = load_bundle(args.model)
    records, y_true = _labeled_task_rows(bundle, args.data)
    X = bundle.featurize(records)
    matrix = confusion(y_true, bundle.predict(X), len(bundle.class_names), bundle.class_names)
    report = compute_metrics(matrix)
    report_path = Path(args.report)
    report_path.parent.mkdir(parents=True, exist_ok=True)
    report_path.write_text(metrics_to_json(report, bundle.task))
    report_path.with_suffix(".confusion.csv").write_text(matrix.to_csv())
    log.info("accuracy %.4f -> %s", report.accuracy, report_path)
    return EXIT_OK


def _cmd_predict(args: argparse.Namespace) -> int:
    bundle = load_bundle(args.model)
    records = [impute_missing(r) for r in parse_conn_log_file(args.input, allow_unlabeled=True)]
    X = bundle.featurize(records)
    labels = bundle.predict(X)
    probs = bundle.predict_proba(X)

    header = ["row_index", "predicted_label"]
    if probs is not None:
        header.extend(f"p_{name}" for name in bundle.class_names)
    lines = [",".join(header)]
    for i in range(X.shape[0]):
        row = [str(i), bundle.class_names[int(labels[i])]]
        if probs is not None:
            row.extend(repr(float(v)) for v in probs[i])
        lines.append(",".join(row))
    out_path = Path(args.output)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("\n".join(lines) + "\n")
    log.info("wrote %d predictions -> %s", X.shape[0], out_path)
    return EXIT_OK


def _cmd_importance(args: argparse.Namespace) -> int:
    bundle = load_bundle(args.model)
    records, y_true = _labeled_task_rows(bundle, args.data)
    X = bundle.featurize(records)
    report = permutation_importance(
        bundle,
        X,
        y_true,
        repeats=args.repeats,
        seed=args.seed,
        feature_names=bundle.preproc.schema.names(),
    )
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(report.to_csv())
    log.info("wrote importance report -> %s", out_path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iotids",
        description="IoT flow intrusion-detection experiments: synthesize data, "
        "train standalone and hybrid classifiers, evaluate, predict.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic labeled conn log")
    p.add_argument("--spec", required=True, help="synthesis spec JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train", help="run the full training pipeline")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--data", help="conn-log file or directory of *.labeled files")
    p.add_argument("--out", help="run output directory")
    p.add_argument("--cidr", help="CIDR->country CSV table")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a trained model on labeled data")
    p.add_argument("--model", required=True, help="model bundle JSON")
    p.add_argument("--data", required=True)
    p.add_argument("--report", required=True, help="metrics JSON output path")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("predict", help="predict labels for a conn log")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("importance", help="permutation feature importance")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_importance)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        _setup_logging()
        args = build_parser().parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except (DataError, IoFailure) as exc:
        log.error("data error: %s", exc)
        return EXIT_DATA
    except ModelError as exc:
        log.error("model error: %s", exc)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
