"""Labelled fingerprint datasets, device maps and their CSV formats.

Feature values live in a float64 matrix with NaN standing for Missing, so the
learners can work on whole columns at once. ``Dataset.instances`` gives the
row-by-row view when that is more convenient.
"""

from __future__ import annotations

import csv
import io
import math
import re
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .schema import FeatureSchema

MISSING = "?"
LABEL_COLUMN = "label"
WEIGHT_COLUMN = "weight"

_MAC_RE = re.compile(r"^[0-9a-f]{2}(:[0-9a-f]{2}){5}$")


class DataFormatError(ValueError):
    """A malformed dataset or device-map file; ``row`` is 1-based over data rows."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        super().__init__(message if row is None else f"row {row}: {message}")


@dataclass(frozen=True)
class LabeledInstance:
    values: tuple  # int or None per schema feature
    label: str
    weight: float = 1.0


@dataclass(frozen=True, eq=False)
class Dataset:
    schema: FeatureSchema
    X: np.ndarray  # (n, d) float64, NaN = Missing
    y: np.ndarray  # (n,) int64 codes into ``classes``
    classes: tuple[str, ...]
    weights: np.ndarray = field(default=None)
    name: str = ""

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64).reshape(-1, len(self.schema))
        y = np.asarray(self.y, dtype=np.int64).reshape(-1)
        w = (np.ones(len(y)) if self.weights is None
             else np.asarray(self.weights, dtype=np.float64).reshape(-1))
        if not (len(X) == len(y) == len(w)):
            raise ValueError("X, y and weights disagree on the number of instances")
        if len(y) and (y.min() < 0 or y.max() >= len(self.classes)):
            raise ValueError("label code outside the class list")
        if list(self.classes) != sorted(set(self.classes)):
            raise ValueError("classes must be distinct and sorted")
        if np.any(w < 0):
            raise ValueError("instance weights must be non-negative")
        for arr in (X, y, w):
            arr.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "classes", tuple(self.classes))

    @classmethod
    def from_instances(cls, schema: FeatureSchema, instances: Iterable[LabeledInstance],
                       name: str = "") -> Dataset:
        instances = list(instances)
        d = len(schema)
        X = np.full((len(instances), d), np.nan)
        for i, inst in enumerate(instances):
            if len(inst.values) != d:
                raise ValueError(
                    f"instance {i} has {len(inst.values)} values, schema has {d}")
            for j, v in enumerate(inst.values):
                if v is not None:
                    X[i, j] = v
        classes = tuple(sorted({inst.label for inst in instances}))
        code = {c: i for i, c in enumerate(classes)}
        y = [code[inst.label] for inst in instances]
        w = [inst.weight for inst in instances]
        return cls(schema, X, y, classes, w, name)

    def __len__(self):
        return len(self.y)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.schema == other.schema
                and self.classes == other.classes
                and np.array_equal(self.X, other.X, equal_nan=True)
                and np.array_equal(self.y, other.y)
                and np.array_equal(self.weights, other.weights))

    @property
    def labels(self) -> list[str]:
        return [self.classes[i] for i in self.y]

    @property
    def instances(self) -> Iterator[LabeledInstance]:
        for row, code, w in zip(self.X, self.y, self.weights):
            yield LabeledInstance(row_values(row), self.classes[code], float(w))

    def subset(self, index) -> Dataset:
        """Rows selected by ``index``; the class list is kept as is."""
        index = np.asarray(index)
        return Dataset(self.schema, self.X[index], self.y[index], self.classes,
                       self.weights[index], self.name)

    def select_features(self, names: Sequence[str]) -> Dataset:
        cols = [self.schema.index(n) for n in names]
        feats = tuple(self.schema.features[c] for c in cols)
        return Dataset(FeatureSchema(feats), self.X[:, cols], self.y, self.classes,
                       self.weights, self.name)

    def class_weights(self) -> np.ndarray:
        return np.bincount(self.y, weights=self.weights, minlength=len(self.classes))


def row_values(row) -> tuple:
    return tuple(None if math.isnan(v) else int(v) for v in row)


@contextmanager
def _text(stream, mode):
    """Yield a text handle for a path, text stream or byte stream."""
    if isinstance(stream, (str, Path)):
        with open(stream, mode, encoding="utf-8", newline="") as fh:
            yield fh
    elif isinstance(stream, io.TextIOBase):
        yield stream
    else:
        wrapper = io.TextIOWrapper(stream, encoding="utf-8", newline="")
        try:
            yield wrapper
        finally:
            wrapper.flush()
            wrapper.detach()


def write_csv(dataset: Dataset, sink) -> None:
    """Write ``dataset`` as CSV: feature columns, then ``label``.

    A ``weight`` column is added only when some weight differs from 1.
    """
    weighted = bool(np.any(dataset.weights != 1.0))
    header = dataset.schema.names + [LABEL_COLUMN]
    if weighted:
        header.append(WEIGHT_COLUMN)
    classes = dataset.classes
    with _text(sink, "w") as text:
        writer = csv.writer(text, lineterminator="\n")
        writer.writerow(header)
        for row, code, w in zip(dataset.X.tolist(), dataset.y.tolist(),
                                dataset.weights.tolist()):
            out = [MISSING if v != v else str(int(v)) for v in row]
            out.append(classes[code])
            if weighted:
                out.append(repr(w))
            writer.writerow(out)


def _parse_int(cell: str, row: int, column: str) -> float:
    if cell == MISSING:
        return np.nan
    body = cell[1:] if cell.startswith("-") else cell
    if not body.isdigit() or not body.isascii():
        raise DataFormatError(f"column {column!r}: non-integer value {cell!r}", row)
    return float(int(cell))


def read_csv(source, expected: FeatureSchema | None = None, name: str = "") -> Dataset:
    """Parse a dataset CSV.

    With ``expected`` given, the header must list exactly its feature names in
    order; otherwise the schema is inferred from the header.
    """
    with _text(source, "r") as text:
        reader = csv.reader(text)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError("empty file: no header row") from None
        if LABEL_COLUMN not in header:
            raise DataFormatError(f"header lacks the {LABEL_COLUMN!r} column")
        label_at = header.index(LABEL_COLUMN)
        weight_at = header.index(WEIGHT_COLUMN) if WEIGHT_COLUMN in header else None
        feature_cols = [i for i in range(len(header)) if i not in (label_at, weight_at)]
        names = [header[i] for i in feature_cols]
        if expected is not None:
            if names != expected.names:
                missing = [n for n in expected.names if n not in names]
                extra = [n for n in names if n not in expected.names]
                raise DataFormatError(
                    "header does not match schema"
                    + (f"; absent: {missing}" if missing else "")
                    + (f"; unexpected: {extra}" if extra else "")
                    + ("; order differs" if not missing and not extra else ""))
            schema = expected
        else:
            schema = FeatureSchema.from_names(names)

        rows, labels, weights = [], [], []
        width = len(header)
        for r, cells in enumerate(reader, start=1):
            if not cells:
                continue
            if len(cells) != width:
                raise DataFormatError(f"expected {width} cells, found {len(cells)}", r)
            rows.append([_parse_int(cells[i], r, header[i]) for i in feature_cols])
            label = cells[label_at]
            if not label:
                raise DataFormatError("empty label", r)
            labels.append(label)
            if weight_at is not None:
                try:
                    weights.append(float(cells[weight_at]))
                except ValueError:
                    raise DataFormatError(
                        f"non-numeric weight {cells[weight_at]!r}", r) from None

    classes = tuple(sorted(set(labels)))
    code = {c: i for i, c in enumerate(classes)}
    X = np.array(rows, dtype=np.float64).reshape(len(rows), len(schema))
    y = np.array([code[c] for c in labels], dtype=np.int64)
    return Dataset(schema, X, y, classes, weights or None, name)


def normalize_mac(text: str) -> str:
    mac = text.strip().lower().replace("-", ":")
    if not _MAC_RE.match(mac):
        raise ValueError(f"invalid MAC address {text!r}")
    return mac


def mac_to_text(raw: bytes) -> str:
    return ":".join(f"{b:02x}" for b in raw)


@dataclass(frozen=True)
class DeviceMap:
    """MAC address (lowercase colon-hex) to device name."""

    devices: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for mac, name in self.devices.items():
            if not name:
                raise ValueError(f"empty device name for {mac}")
            clean[normalize_mac(mac)] = name
        object.__setattr__(self, "devices", clean)

    def get(self, mac: str):
        return self.devices.get(mac)

    def __contains__(self, mac):
        return mac in self.devices

    def __len__(self):
        return len(self.devices)


def read_device_map(source) -> DeviceMap:
    """Read ``mac,device`` rows; a leading ``mac,device`` header is optional."""
    devices = {}
    with _text(source, "r") as text:
        for r, cells in enumerate(csv.reader(text), start=1):
            if not cells or not "".join(cells).strip():
                continue
            if r == 1 and [c.strip().lower() for c in cells] == ["mac", "device"]:
                continue
            if len(cells) != 2:
                raise DataFormatError(f"expected 'mac,device', got {cells}", r)
            try:
                mac = normalize_mac(cells[0])
            except ValueError as exc:
                raise DataFormatError(str(exc), r) from None
            if not cells[1].strip():
                raise DataFormatError("empty device name", r)
            devices[mac] = cells[1].strip()
    return DeviceMap(devices)


def write_device_map(devices: DeviceMap, sink) -> None:
    with _text(sink, "w") as text:
        writer = csv.writer(text, lineterminator="\n")
        writer.writerow(["mac", "device"])
        for mac in sorted(devices.devices):
            writer.writerow([mac, devices.devices[mac]])
