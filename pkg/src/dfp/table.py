"""Decision Table classifier: best-first forward feature-subset search scored by
leave-one-out accuracy, then exact-match lookup with majority fallback."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset, row_values
from .tree import SchemaMismatch

MERIT_EPS = 1e-12
_CHUNK = 1 << 16


@dataclass(frozen=True)
class SearchParams:
    stale_limit: int = 5
    direction: str = "forward"

    def __post_init__(self):
        if self.stale_limit < 1:
            raise ValueError("stale_limit must be >= 1")
        if self.direction != "forward":
            raise ValueError("only forward search is supported")


def _feature_codes(X: np.ndarray):
    """Dense integer code per column; all NaNs share one code."""
    codes, cards = [], []
    for j in range(X.shape[1]):
        uniq, inv = np.unique(X[:, j], return_inverse=True)
        codes.append(inv.reshape(-1).astype(np.int64))
        cards.append(max(len(uniq), 1))
    return codes, cards


def _cells(codes, cards, subset, n):
    cell = np.zeros(n, dtype=np.int64)
    for j in subset:
        cell = np.unique(cell * cards[j] + codes[j], return_inverse=True)[1].reshape(-1)
    return cell


def _loo_accuracy(cell: np.ndarray, y: np.ndarray, w: np.ndarray, n_classes: int) -> float:
    total_w = w.sum()
    if total_w <= 0:
        return 0.0
    n_cells = int(cell.max()) + 1 if len(cell) else 0
    counts = np.bincount(cell * n_classes + y, weights=w,
                         minlength=n_cells * n_classes).reshape(n_cells, n_classes)
    overall = counts.sum(axis=0)
    correct = 0.0
    for start in range(0, len(y), _CHUNK):
        sl = slice(start, start + _CHUNK)
        yc, wc = y[sl], w[sl]
        idx = np.arange(len(yc))
        rest = counts[cell[sl]].copy()
        rest[idx, yc] -= wc
        empty = rest.sum(axis=1) <= MERIT_EPS
        if empty.any():
            fallback = np.broadcast_to(overall, (int(empty.sum()), n_classes)).copy()
            fallback[np.arange(len(fallback)), yc[empty]] -= wc[empty]
            rest[empty] = fallback
        pred = np.argmax(rest, axis=1)
        correct += wc[pred == yc].sum()
    return float(correct / total_w)


def loo_merit(dataset: Dataset, feature_subset) -> float:
    """Leave-one-out accuracy of a table keyed on ``feature_subset``.

    Each instance is classified by the table built from all other instances;
    an empty cell falls back to the majority class of those others.
    """
    cols = [dataset.schema.index(n) for n in feature_subset]
    codes, cards = _feature_codes(dataset.X[:, cols]) if cols else ([], [])
    cell = _cells(codes, cards, range(len(cols)), len(dataset))
    return _loo_accuracy(cell, dataset.y, dataset.weights, len(dataset.classes))


@dataclass(frozen=True, eq=False)
class DecisionTableModel:
    selected_features: tuple
    table: dict  # key tuple (int or None per selected feature) -> class weights
    majority_class: str
    classes: tuple
    features: tuple
    schema_fingerprint: str
    merit: float = 0.0
    params: SearchParams = SearchParams()
    metadata: dict = field(default_factory=dict)

    kind = "dtable"

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != len(self.features):
            raise SchemaMismatch(
                f"expected {len(self.features)} feature columns, got {X.shape}")
        cols = [self.features.index(n) for n in self.selected_features]
        out = np.zeros((len(X), len(self.classes)))
        fallback = self.classes.index(self.majority_class)
        for i, row in enumerate(X[:, cols]):
            counts = self.table.get(row_values(row))
            if counts is None:
                out[i, fallback] = 1.0
            else:
                out[i] = counts / counts.sum()
        return out

    def classify(self, vector) -> dict:
        row = np.array([[np.nan if v is None else v for v in vector]], dtype=np.float64)
        return dict(zip(self.classes, self.predict_proba(row)[0].tolist()))

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1)

    def to_dict(self) -> dict:
        rows = [{"key": list(k), "counts": [float(c) for c in v]}
                for k, v in sorted(self.table.items(), key=lambda kv: _sort_key(kv[0]))]
        return {"selected_features": list(self.selected_features),
                "majority_class": self.majority_class,
                "merit": self.merit,
                "params": {"stale_limit": self.params.stale_limit,
                           "direction": self.params.direction},
                "table": rows}

    @classmethod
    def from_dict(cls, doc, classes, features, fingerprint, metadata):
        selected = tuple(doc["selected_features"])
        for name in selected:
            if name not in features:
                raise ValueError(f"selected feature {name!r} not in model features")
        table = {}
        for row in doc["table"]:
            key = tuple(None if v is None else int(v) for v in row["key"])
            counts = np.asarray(row["counts"], dtype=np.float64)
            if len(key) != len(selected) or counts.shape != (len(classes),):
                raise ValueError("decision table row has the wrong arity")
            table[key] = counts
        if doc["majority_class"] not in classes:
            raise ValueError("majority class not among the model classes")
        return cls(selected, table, doc["majority_class"], tuple(classes),
                   tuple(features), fingerprint, float(doc["merit"]),
                   SearchParams(**doc["params"]), metadata)


def _sort_key(key):
    return tuple((v is None, -1 if v is None else v) for v in key)


def classify_table(model: DecisionTableModel, vector) -> dict:
    return model.classify(vector)


def search_subset(dataset: Dataset, params: SearchParams = SearchParams()):
    """Best-first forward search; returns (feature indices, merit).

    Expansion picks the open subset with the highest merit (fewer features,
    then lower indices, on ties). The search stops after ``stale_limit``
    consecutive expansions that do not improve on the best merit so far.
    """
    n, d = dataset.X.shape
    codes, cards = _feature_codes(dataset.X)
    y, w, k = dataset.y, dataset.weights, len(dataset.classes)

    def merit(subset):
        return _loo_accuracy(_cells(codes, cards, subset, n), y, w, k)

    best = ()
    best_merit = merit(best)
    frontier = {best: best_merit}
    visited = {best}
    stale = 0
    while frontier and stale < params.stale_limit:
        node = min(frontier, key=lambda s: (-frontier[s], len(s), s))
        del frontier[node]
        improved = False
        for j in range(d):
            if j in node:
                continue
            child = tuple(sorted(node + (j,)))
            if child in visited:
                continue
            visited.add(child)
            m = merit(child)
            frontier[child] = m
            if m > best_merit + MERIT_EPS:
                best, best_merit, improved = child, m, True
        stale = 0 if improved else stale + 1
    return best, best_merit


def train_decision_table(dataset: Dataset, params: SearchParams = SearchParams(),
                         metadata: dict | None = None) -> DecisionTableModel:
    if len(dataset) == 0:
        raise ValueError("cannot train on an empty dataset")
    subset, merit = search_subset(dataset, params)
    names = dataset.schema.names
    selected = tuple(names[j] for j in subset)
    k = len(dataset.classes)
    table = {}
    for row, label, wt in zip(dataset.X[:, list(subset)], dataset.y, dataset.weights):
        key = row_values(row)
        counts = table.get(key)
        if counts is None:
            counts = table[key] = np.zeros(k)
        counts[label] += wt
    majority = dataset.classes[int(np.argmax(dataset.class_weights()))]
    return DecisionTableModel(selected, table, majority, dataset.classes, tuple(names),
                              dataset.schema.fingerprint(), merit, params,
                              dict(metadata or {}))
