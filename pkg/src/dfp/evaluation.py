"""Hold-out evaluation: seeded splits, metrics, and comparison reports."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .dataset import Dataset, _text
from .tree import SchemaMismatch

METRICS_FORMAT = "dfp-metrics"
METRICS_VERSION = 1


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0
    stratified: bool = False

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must lie in (0, 1)")


def split_dataset(dataset: Dataset, spec: SplitSpec = SplitSpec()):
    """Seeded shuffle, then the first floor(fraction * n) rows go to training.

    In stratified mode each class is cut separately (floor per class) and the
    shuffled order is kept within both partitions.
    """
    n = len(dataset)
    if n < 2:
        raise ValueError("need at least 2 instances to split")
    rng = np.random.default_rng(spec.seed)
    perm = rng.permutation(n)
    if spec.stratified:
        in_train = np.zeros(n, dtype=bool)
        ys = dataset.y[perm]
        for c in range(len(dataset.classes)):
            members = perm[ys == c]
            in_train[members[:math.floor(spec.train_fraction * len(members))]] = True
        train_idx = perm[in_train[perm]]
        test_idx = perm[~in_train[perm]]
    else:
        cut = math.floor(spec.train_fraction * n)
        train_idx, test_idx = perm[:cut], perm[cut:]
    if len(train_idx) == 0 or len(test_idx) == 0:
        raise ValueError(
            f"split of {n} instances at {spec.train_fraction} leaves a partition empty")
    return dataset.subset(train_idx), dataset.subset(test_idx)


@dataclass
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class Metrics:
    accuracy: float
    classes: list
    confusion_matrix: list  # rows = actual class, columns = predicted class
    per_class: dict = field(default_factory=dict)
    instance_count: int = 0
    model_kind: str = ""
    dataset_name: str = ""
    feature_count: int = 0

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["format"] = METRICS_FORMAT
        doc["version"] = METRICS_VERSION
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> Metrics:
        if doc.get("format") != METRICS_FORMAT or doc.get("version") != METRICS_VERSION:
            raise ValueError("not a version-1 dfp metrics document")
        per_class = {k: ClassMetrics(**v) for k, v in doc["per_class"].items()}
        return cls(doc["accuracy"], doc["classes"], doc["confusion_matrix"], per_class,
                   doc["instance_count"], doc["model_kind"], doc["dataset_name"],
                   doc.get("feature_count", 0))


def metrics_from_predictions(actual: Sequence[str], predicted: Sequence[str],
                             classes=None, model_kind="", dataset_name="",
                             feature_count=0) -> Metrics:
    classes = sorted(set(classes or []) | set(actual) | set(predicted))
    pos = {c: i for i, c in enumerate(classes)}
    cm = np.zeros((len(classes), len(classes)), dtype=np.int64)
    np.add.at(cm, ([pos[a] for a in actual], [pos[p] for p in predicted]), 1)
    total = int(cm.sum())
    per_class = {}
    for i, c in enumerate(classes):
        tp = int(cm[i, i])
        col, row = int(cm[:, i].sum()), int(cm[i].sum())
        precision = tp / col if col else 0.0
        recall = tp / row if row else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[c] = ClassMetrics(precision, recall, f1, row)
    accuracy = float(np.trace(cm)) / total if total else 0.0
    return Metrics(accuracy, classes, cm.tolist(), per_class, total, model_kind,
                   dataset_name, feature_count)


def _aligned_matrix(model, data: Dataset) -> np.ndarray:
    names = data.schema.names
    if list(model.features) == names:
        return data.X
    absent = [n for n in model.features if n not in names]
    if absent:
        raise SchemaMismatch(f"dataset lacks model features {absent}")
    return data.X[:, [names.index(n) for n in model.features]]


def evaluate(model, test: Dataset, dataset_name: str | None = None) -> Metrics:
    """Classify every test instance (argmax, first class on ties) and score it."""
    X = _aligned_matrix(model, test)
    predicted = model.predict(X) if len(test) else np.zeros(0, dtype=int)
    return metrics_from_predictions(
        test.labels, [model.classes[i] for i in predicted], model.classes,
        model.kind, test.name if dataset_name is None else dataset_name,
        len(model.features))


def cross_validate(dataset: Dataset, fit: Callable[[Dataset], object], folds: int = 10,
                   seed: int = 0) -> list[Metrics]:
    """Plain k-fold cross-validation over a seeded permutation."""
    if not 2 <= folds <= len(dataset):
        raise ValueError("folds must be between 2 and the number of instances")
    perm = np.random.default_rng(seed).permutation(len(dataset))
    results = []
    for part in np.array_split(perm, folds):
        mask = np.ones(len(dataset), dtype=bool)
        mask[part] = False
        model = fit(dataset.subset(perm[mask[perm]]))
        results.append(evaluate(model, dataset.subset(part)))
    return results


def seed_sweep(dataset: Dataset, fit, seeds, spec: SplitSpec = SplitSpec()):
    """Hold-out accuracy for each seed; returns (accuracies, mean, std)."""
    accs = []
    for seed in seeds:
        train, test = split_dataset(
            dataset, SplitSpec(spec.train_fraction, seed, spec.stratified))
        accs.append(evaluate(fit(train), test).accuracy)
    arr = np.asarray(accs)
    return accs, float(arr.mean()), float(arr.std(ddof=1) if len(arr) > 1 else 0.0)


# --- comparison reports -----------------------------------------------------

REPORT_COLUMNS = ["Source", "Fingerprint", "Devices/Dataset", "Performance"]


@dataclass(frozen=True)
class ReportRow:
    source: str
    fingerprint: str
    devices: str
    performance: str
    measured: bool = False

    def cells(self):
        return [self.source, self.fingerprint, self.devices, self.performance]


@dataclass(frozen=True)
class CitedValue:
    model_kind: str
    dataset: str
    accuracy: float  # percent
    provenance: str


def _data_file(name: str) -> str:
    return resources.files("dfp").joinpath("data", name).read_text(encoding="utf-8")


def load_literature(source=None) -> list[ReportRow]:
    """Literature rows (one per table line) from a CSV with the report columns."""
    text = _data_file("literature.csv") if source is None else Path(source).read_text(
        encoding="utf-8")
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != REPORT_COLUMNS:
        raise ValueError(f"literature file header must be {','.join(REPORT_COLUMNS)}")
    return [ReportRow(r["Source"], r["Fingerprint"], r["Devices/Dataset"],
                      r["Performance"]) for r in reader]


def load_cited(source=None) -> list[CitedValue]:
    text = _data_file("cited_accuracy.csv") if source is None else Path(
        source).read_text(encoding="utf-8")
    return [CitedValue(r["model_kind"], r["dataset"], float(r["accuracy"]),
                       r["provenance"]) for r in csv.DictReader(io.StringIO(text))]


def measured_row(m: Metrics) -> ReportRow:
    name = m.dataset_name or "dataset"
    return ReportRow(f"This run ({m.model_kind})", f"1^Pkt × {m.feature_count}^Feat",
                     f"{len(m.classes)} {name}", f"{100 * m.accuracy:.2f}% {name}",
                     measured=True)


def _same_dataset(a: str, b: str) -> bool:
    norm = lambda s: "".join(ch for ch in s.lower() if ch.isalnum())
    return bool(norm(a)) and (norm(a) in norm(b) or norm(b) in norm(a))


@dataclass
class ComparisonReport:
    rows: list
    comparisons: list  # (Metrics, [CitedValue])

    def grouped_rows(self):
        """Consecutive rows from one source merged; differing cells joined by ' / '."""
        groups = []
        for row in self.rows:
            if groups and groups[-1][0].source == row.source and not row.measured:
                groups[-1].append(row)
            else:
                groups.append([row])
        merged = []
        for g in groups:
            cells = []
            for col in zip(*(r.cells() for r in g)):
                uniq = list(dict.fromkeys(col))
                cells.append(" / ".join(uniq))
            merged.append(cells)
        return merged

    def to_markdown(self) -> str:
        out = ["| " + " | ".join(REPORT_COLUMNS) + " |",
               "|" + "---|" * len(REPORT_COLUMNS)]
        out += ["| " + " | ".join(cells) + " |" for cells in self.grouped_rows()]
        if self.comparisons:
            out += ["", "| Model | Dataset | Measured | Cited | Difference | Provenance |",
                    "|---|---|---|---|---|---|"]
            for m, cited in self.comparisons:
                measured = 100 * m.accuracy
                if not cited:
                    out.append(f"| {m.model_kind} | {m.dataset_name} | {measured:.2f}% "
                               "| n/a | n/a | no cited value |")
                for c in cited:
                    out.append(f"| {m.model_kind} | {m.dataset_name} | {measured:.2f}% | "
                               f"{c.accuracy:g}% | {measured - c.accuracy:+.2f} pp | "
                               f"{c.provenance} |")
        return "\n".join(out) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for row in self.rows:
            writer.writerow(row.cells())
        return buf.getvalue()


def comparison_report(results: Sequence, literature: Sequence[ReportRow] | None = None,
                      cited: Sequence[CitedValue] | None = None) -> ComparisonReport:
    """Literature rows followed by one row per measured ``Metrics``.

    ``results`` may mix ``Metrics`` and ready-made ``ReportRow`` entries. Each
    measured result is also set against every cited accuracy for the same
    model kind and dataset.
    """
    literature = load_literature() if literature is None else list(literature)
    cited = load_cited() if cited is None else list(cited)
    if not results and not literature:
        raise ValueError("nothing to report")
    rows = list(literature)
    comparisons = []
    for r in results:
        if isinstance(r, ReportRow):
            rows.append(r)
            continue
        rows.append(measured_row(r))
        comparisons.append((r, [c for c in cited if c.model_kind == r.model_kind
                                and _same_dataset(c.dataset, r.dataset_name)]))
    return ComparisonReport(rows, comparisons)


def write_report(report: ComparisonReport, path) -> None:
    text = report.to_csv() if str(path).endswith(".csv") else report.to_markdown()
    with _text(path, "w") as fh:
        fh.write(text)
