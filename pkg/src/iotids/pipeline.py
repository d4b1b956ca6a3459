"""End-to-end experiment pipeline: ingest -> impute -> label -> sample ->
split -> fit encoders/scaler on train only -> transform -> train -> report.

The pipeline reads partitions through a PartitionedDataset whose access log
records (phase, partition) pairs; tests assert that no test or validation
row is touched before encoder and scaler fitting completes.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, ModelError, SchemaMismatch
from .features import (
    CATEGORICAL_FIELDS,
    CidrTable,
    categorical_values,
    fit_min_max,
    fit_one_hot,
    matrix_from_records,
)
from .flows import (
    Dataset,
    LabeledFlow,
    LABEL_MAP_VERSION,
    balance_sample,
    class_index,
    label_rows,
    parse_conn_log_file,
    task_class_names,
)
from .metrics import compute_metrics, confusion, export_report
from .models.adaboost import AdaParams, fit_adaboost
from .models.forest import ForestParams, fit_random_forest
from .models.gbm import GbmParams, fit_gbm
from .models.knn import fit_knn
from .models.svm import SvmClassifier, SvmParams, fit_linear_svm
from .nn.network import build_ann, build_cnn
from .nn.training import TrainParams, train_network
from .persist import ModelBundle, PreprocState
from .splits import SplitIndices, k_fold, mean_score, stratified_split
from .voting import build_binary_hybrid, build_multiclass_hybrid

VALID_MODELS = ("rf", "gbm", "ada", "knn", "svm", "ann", "cnn", "hybrid")
HYBRID_MEMBERS = {"binary": ("rf", "gbm", "svm", "knn"), "multiclass": ("rf", "gbm", "ada")}
_MODEL_SEED_INDEX = {"rf": 1, "gbm": 2, "ada": 3, "knn": 4, "svm": 5, "ann": 6, "cnn": 7}

# architecture keys split off from optimizer keys in ann/cnn model_params
_ANN_ARCH_KEYS = {"hidden", "dropout_rate", "elu_alpha", "l1", "l2"}
_CNN_ARCH_KEYS = {"n_filters", "kernel_width", "pool", "dropout_rate", "hidden", "l1", "l2"}

CONFIG_VERSION = 1


@dataclass
class ExperimentConfig:
    task: str
    models: list[str]
    per_class: int
    seed: int
    split: tuple[float, float, float] = (0.7, 0.2, 0.1)
    cv_folds: int = 0
    expected_width: int | None = None
    model_params: dict[str, dict] = field(default_factory=dict)
    paths: dict[str, str] = field(default_factory=dict)
    config_version: int = CONFIG_VERSION

    def validate(self) -> None:
        if self.config_version != CONFIG_VERSION:
            raise ConfigError(f"unsupported config_version {self.config_version}")
        if self.task not in ("binary", "multiclass"):
            raise ConfigError(f"task must be binary or multiclass, got {self.task!r}")
        unknown = [m for m in self.models if m not in VALID_MODELS]
        if unknown:
            raise ConfigError(f"unknown models {unknown}; valid: {list(VALID_MODELS)}")
        if len(set(self.models)) != len(self.models):
            raise ConfigError("duplicate model names")
        if "svm" in self.models and self.task != "binary":
            raise ConfigError("svm is a binary-task model")
        if "hybrid" in self.models:
            missing = [m for m in HYBRID_MEMBERS[self.task] if m not in self.models]
            if missing:
                raise ConfigError(f"hybrid needs members {missing} in the model list")
        if len(self.split) != 3 or any(f < 0 for f in self.split):
            raise ConfigError("split must be three non-negative fractions")
        if abs(sum(self.split) - 1.0) > 1e-9:
            raise ConfigError("split fractions must sum to 1")
        if self.per_class < 1:
            raise ConfigError("per_class must be >= 1")
        if self.cv_folds != 0 and self.cv_folds < 2:
            raise ConfigError("cv_folds must be 0 (off) or >= 2")
        if self.seed is None:
            raise ConfigError("seed is required")

    def to_dict(self) -> dict:
        return {
            "config_version": self.config_version,
            "task": self.task,
            "models": list(self.models),
            "per_class": self.per_class,
            "seed": self.seed,
            "split": list(self.split),
            "cv_folds": self.cv_folds,
            "expected_width": self.expected_width,
            "model_params": self.model_params,
            "paths": self.paths,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        try:
            cfg = cls(
                task=d["task"],
                models=list(d["models"]),
                per_class=d["per_class"],
                seed=d["seed"],
                split=tuple(d.get("split", (0.7, 0.2, 0.1))),
                cv_folds=d.get("cv_folds", 0),
                expected_width=d.get("expected_width"),
                model_params=d.get("model_params", {}),
                paths=d.get("paths", {}),
                config_version=d.get("config_version", CONFIG_VERSION),
            )
        except KeyError as exc:
            raise ConfigError(f"missing config field: {exc}") from exc
        cfg.validate()
        return cfg

    @classmethod
    def from_json_file(cls, path: str | Path) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc


class PartitionedDataset:
    """Partition-scoped row access with a (phase, partition) log."""

    def __init__(self, dataset: Dataset, split: SplitIndices):
        self._rows = dataset.rows
        self.split = split
        self.phase = "init"
        self.access_log: list[tuple[str, str]] = []

    def rows(self, partition: str) -> list[LabeledFlow]:
        self.access_log.append((self.phase, partition))
        return [self._rows[i] for i in self.split.partitions()[partition]]


def read_labeled_dir(data_path: str | Path) -> Dataset:
    """Parse a .labeled file, or every sorted *.labeled file in a directory."""
    p = Path(data_path)
    if p.is_file():
        files = [p]
    elif p.is_dir():
        files = sorted(p.glob("*.labeled"))
    else:
        raise DataError(f"data path {p} does not exist")
    if not files:
        raise DataError(f"no .labeled files under {p}")
    records = []
    for f in files:
        records.extend(parse_conn_log_file(f))
    return label_rows(records, source_files=tuple(f.name for f in files))


def _derived_seed(seed: int, name: str, extra: int = 0) -> int:
    return int(np.random.SeedSequence([seed, _MODEL_SEED_INDEX[name], extra]).generate_state(1)[0])


def _split_train_args(kind: str, overrides: dict) -> tuple[dict, dict]:
    arch_keys = _ANN_ARCH_KEYS if kind == "ann" else _CNN_ARCH_KEYS
    arch = {k: v for k, v in overrides.items() if k in arch_keys}
    if "hidden" in arch and kind == "ann":
        arch["hidden"] = tuple(arch["hidden"])
    train = {k: v for k, v in overrides.items() if k not in arch_keys}
    return arch, train


def train_one_model(
    kind: str,
    X_train: np.ndarray,
    y_train: np.ndarray,
    X_es: np.ndarray,
    y_es: np.ndarray,
    X_val: np.ndarray,
    y_val: np.ndarray,
    seed: int,
    overrides: dict,
    n_classes: int,
    fold_extra: int = 0,
):
    """Train one standalone model; returns (model, curve-or-None).

    X_es/y_es is the training slice for early-stopping models (equal to the
    full train partition when a validation partition exists); X_val/y_val is
    their validation set.
    """
    overrides = dict(overrides)
    if kind == "rf":
        params = ForestParams(**overrides, seed=_derived_seed(seed, "rf", fold_extra))
        return fit_random_forest(X_train, y_train, params), None
    if kind == "gbm":
        model, curve = fit_gbm(X_es, y_es, X_val, y_val, GbmParams(**overrides))
        return model, curve
    if kind == "ada":
        return fit_adaboost(X_train, y_train, AdaParams(**overrides)), None
    if kind == "knn":
        return fit_knn(X_train, y_train, overrides.get("k", 5)), None
    if kind == "svm":
        params = SvmParams(
            **{k: v for k, v in overrides.items() if k != "k"},
            seed=_derived_seed(seed, "svm", fold_extra),
        )
        model = fit_linear_svm(X_train, 2.0 * y_train - 1.0, params)
        return SvmClassifier(model), None
    if kind in ("ann", "cnn"):
        arch, train = _split_train_args(kind, overrides)
        width = X_train.shape[1]
        spec = build_ann(width, n_classes, **arch) if kind == "ann" else build_cnn(width, n_classes, **arch)
        params = TrainParams(**train, seed=_derived_seed(seed, kind, fold_extra))
        net, curve = train_network(spec, X_es, y_es, X_val, y_val, params)
        return net, curve
    raise ConfigError(f"not a standalone model: {kind!r}")


@dataclass
class RunResult:
    out_dir: Path
    manifest_path: Path
    manifest: dict
    bundles: dict[str, ModelBundle]
    preproc: PreprocState
    X: dict[str, np.ndarray]
    y: dict[str, np.ndarray]
    access_log: list[tuple[str, str]]
    curves: dict[str, object]


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run_training(
    config: ExperimentConfig,
    data_path: str | Path,
    out_dir: str | Path,
    cidr_path: str | Path | None = None,
) -> RunResult:
    """Run the whole training pipeline and write all artifacts + manifest."""
    config.validate()
    task = config.task
    class_names = task_class_names(task)
    n_classes = len(class_names)

    dataset = read_labeled_dir(data_path)
    sampled = balance_sample(dataset, task, config.per_class, config.seed)
    y_all = np.array([class_index(f, task) for f in sampled.rows], dtype=np.int64)
    split = stratified_split(y_all, config.split, config.seed)
    parts = PartitionedDataset(sampled, split)
    cidr = CidrTable.from_csv(cidr_path) if cidr_path else CidrTable()
    cidr_rows = tuple((str(net), country) for net, country in cidr.entries)

    # fit encoders and scaler on the training partition only
    parts.phase = "fit_encoders"
    train_flows = parts.rows("train")
    train_records = [f.record for f in train_flows]
    vocabulary = fit_one_hot([categorical_values(r, cidr) for r in train_records], CATEGORICAL_FIELDS)
    raw_train, schema = matrix_from_records(train_records, cidr, vocabulary)
    if config.expected_width is not None and schema.width != config.expected_width:
        raise SchemaMismatch(f"finalized width {schema.width} != expected {config.expected_width}")
    min_max = fit_min_max(raw_train)
    preproc = PreprocState(vocabulary, min_max, cidr_rows)

    parts.phase = "transform"
    X: dict[str, np.ndarray] = {}
    y: dict[str, np.ndarray] = {}
    for part in ("train", "test", "val"):
        flows_part = parts.rows(part)
        X[part], _ = matrix_from_records([f.record for f in flows_part], cidr, vocabulary, min_max)
        y[part] = np.array([class_index(f, task) for f in flows_part], dtype=np.int64)

    # validation source for early-stopping models: the val partition when
    # present, otherwise the first rotation of the (cv_folds or 5)-fold plan
    parts.phase = "train"
    if len(y["val"]):
        X_es, y_es, X_val, y_val = X["train"], y["train"], X["val"], y["val"]
    else:
        plan = k_fold(y["train"], config.cv_folds or 5, config.seed)
        inner_train, inner_val = next(iter(plan))
        X_es, y_es = X["train"][inner_train], y["train"][inner_train]
        X_val, y_val = X["train"][inner_val], y["train"][inner_val]

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    trained: dict[str, object] = {}
    curves: dict[str, object] = {}
    timings: dict[str, float] = {}
    standalone = [m for m in config.models if m != "hybrid"]
    for name in standalone:
        t0 = time.perf_counter()
        try:
            model, curve = train_one_model(
                name,
                X["train"],
                y["train"],
                X_es,
                y_es,
                X_val,
                y_val,
                config.seed,
                config.model_params.get(name, {}),
                n_classes,
            )
        except (ConfigError, DataError):
            raise
        except Exception as exc:
            raise ModelError(f"{name}: {exc}") from exc
        timings[name] = time.perf_counter() - t0
        trained[name] = model
        if curve is not None:
            curves[name] = curve

    if "hybrid" in config.models:
        t0 = time.perf_counter()
        members = [trained[m] for m in HYBRID_MEMBERS[task]]
        hybrid = build_binary_hybrid(*members) if task == "binary" else build_multiclass_hybrid(*members)
        trained["hybrid"] = hybrid
        timings["hybrid"] = time.perf_counter() - t0

    # persist bundles, curves, and test-partition reports
    bundles: dict[str, ModelBundle] = {}
    artifact_paths: list[Path] = []
    for name, model in trained.items():
        bundle = ModelBundle(name, task, model, preproc, config.seed)
        bundles[name] = bundle
        artifact_paths.append(bundle.save(out / "models" / f"{name}.json"))
    for name, curve in curves.items():
        path = out / "curves" / f"{name}_curve.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(curve.to_csv())
        artifact_paths.append(path)

    if len(y["test"]):
        for name, model in trained.items():
            matrix = confusion(y["test"], model.predict(X["test"]), n_classes, class_names)
            report = compute_metrics(matrix)
            written = export_report(report, matrix, {}, out / "reports" / name, task)
            artifact_paths.extend(written)

    if config.cv_folds >= 2:
        artifact_paths.extend(
            _run_cross_validation(config, X["train"], y["train"], trained, n_classes, out)
        )

    timings_path = out / "timings.json"
    timings_path.write_text(json.dumps(timings, indent=2) + "\n")

    manifest = {
        "manifest_version": 1,
        "config": config.to_dict(),
        "provenance": {
            "source_files": list(sampled.provenance.source_files),
            "seed": config.seed,
            "label_map_version": LABEL_MAP_VERSION,
            "sampled_rows": len(sampled.rows),
            "partition_sizes": {k: int(len(v)) for k, v in split.partitions().items()},
            "feature_width": schema.width,
        },
        "artifacts": sorted(
            ({"path": str(p.relative_to(out)), "sha256": _sha256(p)} for p in artifact_paths),
            key=lambda a: a["path"],
        ),
        "unverified": [
            {"path": "timings.json", "sha256": None, "reason": "wall-clock timings"}
        ],
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")

    return RunResult(out, manifest_path, manifest, bundles, preproc, X, y, parts.access_log, curves)


def _run_cross_validation(
    config: ExperimentConfig,
    X_train: np.ndarray,
    y_train: np.ndarray,
    trained: dict[str, object],
    n_classes: int,
    out: Path,
) -> list[Path]:
    """Per-fold accuracy for each non-neural standalone model, plus the
    hybrid's per-fold accuracy curve when configured."""
    plan = k_fold(y_train, config.cv_folds, config.seed)
    scores: dict[str, dict] = {}
    cv_models = [m for m in config.models if m in ("rf", "gbm", "ada", "knn", "svm")]
    for name in cv_models:
        fold_acc = []
        for fold_no, (tr, va) in enumerate(plan):
            model, _ = train_one_model(
                name,
                X_train[tr],
                y_train[tr],
                X_train[tr],
                y_train[tr],
                X_train[va],
                y_train[va],
                config.seed,
                config.model_params.get(name, {}),
                n_classes,
                fold_extra=fold_no + 1,
            )
            fold_acc.append(float(np.mean(model.predict(X_train[va]) == y_train[va])))
        scores[name] = {"fold_accuracy": fold_acc, "mean_accuracy": mean_score(fold_acc)}

    written = []
    cv_path = out / "cv_scores.json"
    cv_path.write_text(json.dumps(scores, indent=2) + "\n")
    written.append(cv_path)

    if "hybrid" in trained:
        lines = ["fold,train_accuracy,val_accuracy"]
        hybrid = trained["hybrid"]
        for fold_no, (tr, va) in enumerate(plan):
            acc_tr = float(np.mean(hybrid.predict(X_train[tr]) == y_train[tr]))
            acc_va = float(np.mean(hybrid.predict(X_train[va]) == y_train[va]))
            lines.append(f"{fold_no},{acc_tr!r},{acc_va!r}")
        curve_path = out / "curves" / "hybrid_curve.csv"
        curve_path.parent.mkdir(parents=True, exist_ok=True)
        curve_path.write_text("\n".join(lines) + "\n")
        written.append(curve_path)
    return written
