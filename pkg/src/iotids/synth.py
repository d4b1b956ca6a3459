"""Synthetic desk-scale data: Gaussian class blobs, optionally rendered as
Zeek-format labeled connection logs with canonical IoT23 label spellings."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, IoFailure
from .flows import (
    BinaryClass,
    MultiClass,
    RawFlowRecord,
    conn_log_header,
    record_to_line,
)

# numeric flow columns that carry the class signal, in blob-dimension order
SIGNAL_COLUMNS = [
    "duration",
    "orig_bytes",
    "resp_bytes",
    "missed_bytes",
    "orig_pkts",
    "orig_ip_bytes",
    "resp_pkts",
    "resp_ip_bytes",
]

# canonical IoT23 spellings per multiclass label
_DETAILED_SPELLING = {
    MultiClass.BENIGN: ("Benign", "-"),
    MultiClass.CC_HEARTBEAT: ("Malicious", "C&C-HeartBeat"),
    MultiClass.DDOS: ("Malicious", "DDoS"),
    MultiClass.OKIRU: ("Malicious", "Okiru"),
    MultiClass.PORT_SCAN: ("Malicious", "PartOfAHorizontalPortScan"),
    MultiClass.CC: ("Malicious", "C&C"),
    MultiClass.ATTACK: ("Malicious", "Attack"),
}


@dataclass(frozen=True)
class SynthSpec:
    task: str  # "binary" (2 classes) or "multiclass" (7 classes)
    rows_per_class: int
    feature_width: int = 8
    center_spacing: float = 6.0  # per-coordinate distance between class centers
    spread: float = 1.0
    label_noise: float = 0.0
    seed: int = 0

    @property
    def n_classes(self) -> int:
        return 2 if self.task == "binary" else 7

    def validate(self) -> None:
        if self.task not in ("binary", "multiclass"):
            raise ConfigError(f"task must be binary or multiclass, got {self.task!r}")
        if self.rows_per_class < 1:
            raise ConfigError("rows_per_class must be >= 1")
        if self.feature_width < 1:
            raise ConfigError("feature_width must be >= 1")
        if not 0.0 <= self.label_noise < 0.5:
            raise ConfigError("label_noise must be in [0, 0.5)")

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "rows_per_class": self.rows_per_class,
            "feature_width": self.feature_width,
            "center_spacing": self.center_spacing,
            "spread": self.spread,
            "label_noise": self.label_noise,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SynthSpec":
        spec = cls(**d)
        spec.validate()
        return spec

    @classmethod
    def from_json_file(cls, path: str | Path) -> "SynthSpec":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read synth spec {path}: {exc}") from exc
        except TypeError as exc:
            raise ConfigError(f"bad synth spec fields: {exc}") from exc


def make_blobs(spec: SynthSpec) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian blobs on the diagonal: class c centered at spacing*c per axis."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    C, n, d = spec.n_classes, spec.rows_per_class, spec.feature_width
    y = np.repeat(np.arange(C), n)
    centers = spec.center_spacing * y[:, None] * np.ones(d)
    X = centers + rng.normal(0.0, spec.spread, size=(C * n, d))
    if spec.label_noise > 0.0:
        flip = rng.random(C * n) < spec.label_noise
        shift = rng.integers(1, C, size=C * n)
        y = np.where(flip, (y + shift) % C, y)
    return X, y.astype(np.int64)


def _class_spelling(task: str, c: int) -> tuple[str, str]:
    if task == "binary":
        return ("Benign", "-") if c == BinaryClass.BENIGN else ("Malicious", "DDoS")
    return _DETAILED_SPELLING[MultiClass(c)]


def blobs_to_records(spec: SynthSpec, X: np.ndarray, y: np.ndarray) -> list[RawFlowRecord]:
    """Render blob rows as flow records; blob dims map onto the signal
    columns (at most eight), shifted positive and rounded where integral."""
    n_signal = min(spec.feature_width, len(SIGNAL_COLUMNS))
    shift = 4.0 * spec.spread  # keeps class-0 values clear of the 0 clip
    records = []
    for i in range(X.shape[0]):
        numeric = {name: 0.0 for name in SIGNAL_COLUMNS}
        for j in range(n_signal):
            numeric[SIGNAL_COLUMNS[j]] = max(0.0, X[i, j] + shift)
        label, detailed = _class_spelling(spec.task, int(y[i]))
        records.append(
            RawFlowRecord(
                ts=1600000000.0 + i,
                uid=f"Csynth{spec.seed}x{i}",
                orig_h=f"192.168.{(i // 250) % 250}.{i % 250 + 1}",
                resp_h=f"203.0.113.{i % 250 + 1}",
                orig_p=49152,
                resp_p=80,
                proto="tcp",
                service=("http", "dns")[i % 2],
                duration=numeric["duration"],
                orig_bytes=int(round(numeric["orig_bytes"])),
                resp_bytes=int(round(numeric["resp_bytes"])),
                conn_state="SF",
                local_orig=True,
                local_resp=False,
                missed_bytes=int(round(numeric["missed_bytes"])),
                history="ShADad",
                orig_pkts=int(round(numeric["orig_pkts"])),
                orig_ip_bytes=int(round(numeric["orig_ip_bytes"])),
                resp_pkts=int(round(numeric["resp_pkts"])),
                resp_ip_bytes=int(round(numeric["resp_ip_bytes"])),
                tunnel_parents="",
                raw_label=label,
                raw_detailed_label=detailed,
            )
        )
    return records


def render_zeek_log(records: list[RawFlowRecord]) -> str:
    return conn_log_header() + "\n" + "\n".join(record_to_line(r) for r in records) + "\n"


def write_synth_dataset(spec: SynthSpec, out_dir: str | Path) -> Path:
    """Emit one deterministic .labeled file for the spec; returns its path."""
    spec.validate()
    X, y = make_blobs(spec)
    records = blobs_to_records(spec, X, y)
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"synth_{spec.task}.labeled"
        path.write_text(render_zeek_log(records))
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    return path
