"""Versioned JSON persistence: one bundle per trained model, carrying the
exact preprocessing state (vocabulary, scaler, CIDR table) it was trained
with, so evaluation and prediction can never accidentally refit."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import IoFailure, ModelDataMismatch
from .features import (
    CidrTable,
    FeatureSchema,
    MinMaxParams,
    OneHotVocabulary,
    build_schema,
    matrix_from_records,
)
from .flows import RawFlowRecord, task_class_names
from .models.adaboost import AdaModel, AdaParams
from .models.forest import ForestModel, ForestParams
from .models.gbm import GbmModel, GbmParams
from .models.knn import KnnModel
from .models.svm import SvmClassifier, SvmModel
from .models.tree import DecisionTree
from .nn.network import Network
from .voting import build_binary_hybrid, build_multiclass_hybrid

BUNDLE_VERSION = 1

MODEL_KINDS = ("rf", "gbm", "ada", "knn", "svm", "ann", "cnn", "hybrid")


@dataclass(frozen=True)
class PreprocState:
    vocabulary: OneHotVocabulary
    min_max: MinMaxParams
    cidr_rows: tuple[tuple[str, str], ...]

    @property
    def schema(self) -> FeatureSchema:
        return build_schema(self.vocabulary)

    @property
    def cidr_table(self) -> CidrTable:
        return CidrTable.from_rows(self.cidr_rows)

    def to_dict(self) -> dict:
        return {
            "vocabulary": {f: list(c) for f, c in self.vocabulary.categories.items()},
            "min_max": {
                "x_min": self.min_max.x_min.tolist(),
                "x_max": self.min_max.x_max.tolist(),
                "fitted_on": self.min_max.fitted_on,
            },
            "cidr": [list(row) for row in self.cidr_rows],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PreprocState":
        vocab = OneHotVocabulary({f: tuple(c) for f, c in d["vocabulary"].items()})
        mm = MinMaxParams(
            np.asarray(d["min_max"]["x_min"], dtype=float),
            np.asarray(d["min_max"]["x_max"], dtype=float),
            d["min_max"]["fitted_on"],
        )
        return cls(vocab, mm, tuple((r[0], r[1]) for r in d["cidr"]))


def _model_to_dict(kind: str, model) -> dict:
    if kind == "rf":
        return {
            "params": asdict(model.params),
            "tree_seeds": model.tree_seeds,
            "features_per_split": model.features_per_split,
            "n_classes": model.n_classes,
            "n_features": model.n_features,
            "trees": [t.to_dict() for t in model.trees],
        }
    if kind == "gbm":
        return {
            "params": asdict(model.params),
            "learning_rate": model.learning_rate,
            "best_round": model.best_round,
            "n_classes": model.n_classes,
            "n_features": model.n_features,
            "rounds": [[t.to_dict() for t in rnd] for rnd in model.rounds],
        }
    if kind == "ada":
        return {
            "params": asdict(model.params),
            "n_classes": model.n_classes,
            "n_features": model.n_features,
            "stages": [{"tree": t.to_dict(), "alpha": a} for t, a in model.stages],
        }
    if kind == "knn":
        return {"k": model.k, "X": model.X.tolist(), "y": model.y.tolist()}
    if kind == "svm":
        inner = model.model if isinstance(model, SvmClassifier) else model
        return {"w": inner.w.tolist(), "b": inner.b, "C": inner.C, "epochs_trained": inner.epochs_trained}
    if kind in ("ann", "cnn"):
        return model.to_dict()
    if kind == "hybrid":
        return {
            "task": model.task,
            "member_names": model.member_names,
            "members": [
                {"kind": name, "model": _model_to_dict(name, member)}
                for name, member in zip(model.member_names, model.members)
            ],
        }
    raise ValueError(f"unknown model kind {kind!r}")


def _model_from_dict(kind: str, d: dict):
    if kind == "rf":
        return ForestModel(
            trees=[DecisionTree.from_dict(t) for t in d["trees"]],
            tree_seeds=d["tree_seeds"],
            features_per_split=d["features_per_split"],
            n_classes=d["n_classes"],
            n_features=d["n_features"],
            params=ForestParams(**d["params"]),
        )
    if kind == "gbm":
        return GbmModel(
            rounds=[[DecisionTree.from_dict(t) for t in rnd] for rnd in d["rounds"]],
            learning_rate=d["learning_rate"],
            best_round=d["best_round"],
            n_classes=d["n_classes"],
            n_features=d["n_features"],
            params=GbmParams(**d["params"]),
        )
    if kind == "ada":
        return AdaModel(
            stages=[(DecisionTree.from_dict(s["tree"]), s["alpha"]) for s in d["stages"]],
            n_classes=d["n_classes"],
            n_features=d["n_features"],
            params=AdaParams(**d["params"]),
        )
    if kind == "knn":
        return KnnModel(np.asarray(d["X"], dtype=float), np.asarray(d["y"], dtype=np.int64), d["k"])
    if kind == "svm":
        return SvmClassifier(SvmModel(np.asarray(d["w"], dtype=float), d["b"], d["C"], d["epochs_trained"]))
    if kind in ("ann", "cnn"):
        return Network.from_dict(d)
    if kind == "hybrid":
        members = [_model_from_dict(m["kind"], m["model"]) for m in d["members"]]
        if d["task"] == "binary":
            return build_binary_hybrid(*members)
        return build_multiclass_hybrid(*members)
    raise ValueError(f"unknown model kind {kind!r}")


def _predict_proba(kind: str, model, X: np.ndarray) -> np.ndarray | None:
    if kind == "rf":
        from .models.forest import predict_forest

        return predict_forest(model, X)[1]
    if kind == "gbm":
        from .models.gbm import predict_gbm

        return predict_gbm(model, X)[1]
    if kind in ("ann", "cnn"):
        return model.predict_proba(X)
    return None


@dataclass
class ModelBundle:
    kind: str
    task: str
    model: object
    preproc: PreprocState
    seed: int

    @property
    def class_names(self) -> list[str]:
        return task_class_names(self.task)

    def featurize(self, records: list[RawFlowRecord]) -> np.ndarray:
        values, _ = matrix_from_records(
            records, self.preproc.cidr_table, self.preproc.vocabulary, self.preproc.min_max
        )
        return values

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.model.predict(X)

    def predict_proba(self, X: np.ndarray) -> np.ndarray | None:
        return _predict_proba(self.kind, self.model, X)

    def to_json(self) -> str:
        doc = {
            "format_version": BUNDLE_VERSION,
            "kind": self.kind,
            "task": self.task,
            "seed": self.seed,
            "class_names": self.class_names,
            "preprocessing": self.preproc.to_dict(),
            "model": _model_to_dict(self.kind, self.model),
        }
        return json.dumps(doc, indent=1) + "\n"

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(self.to_json())
        except OSError as exc:
            raise IoFailure(str(exc)) from exc
        return path


def load_bundle(path: str | Path) -> ModelBundle:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise IoFailure(f"cannot read model bundle {path}: {exc}") from exc
    if doc.get("format_version") != BUNDLE_VERSION:
        raise ModelDataMismatch(f"unsupported bundle version {doc.get('format_version')}")
    kind = doc["kind"]
    if kind not in MODEL_KINDS:
        raise ModelDataMismatch(f"unknown model kind {kind!r}")
    preproc = PreprocState.from_dict(doc["preprocessing"])
    model = _model_from_dict(kind, doc["model"])
    width = getattr(model, "n_features", None)
    if width is not None and width != preproc.schema.width:
        raise ModelDataMismatch(
            f"model expects {width} features but bundled schema has {preproc.schema.width}"
        )
    return ModelBundle(kind, doc["task"], model, preproc, doc["seed"])
