"""C4.5-style decision tree (binary numeric splits, fractional missing values,
error-based pruning by subtree replacement)."""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

from .dataset import Dataset
from .gain import TIE_EPS, WEIGHT_EPS, AttributeScore, best_threshold


class SchemaMismatch(ValueError):
    pass


@dataclass(frozen=True)
class TreeParams:
    min_leaf_weight: float = 2.0
    confidence: float = 0.25
    pruning: bool = True
    max_depth: int | None = None

    def __post_init__(self):
        if self.min_leaf_weight < 1:
            raise ValueError("min_leaf_weight must be >= 1")
        if not 0 < self.confidence <= 0.5:
            raise ValueError("confidence must lie in (0, 0.5]")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be non-negative")


@dataclass
class Leaf:
    counts: np.ndarray  # class weights of the training instances reaching this node

    @property
    def weight(self) -> float:
        return float(self.counts.sum())

    @property
    def predicted(self) -> int:
        return int(np.argmax(self.counts))

    def probabilities(self) -> np.ndarray:
        return self.counts / self.counts.sum()


@dataclass
class Split:
    feature: int
    threshold: float
    children: list  # [<= threshold, > threshold]
    fractions: tuple  # known-weight share of each child, used for Missing values
    counts: np.ndarray

    @property
    def weight(self) -> float:
        return float(self.counts.sum())


def count_nodes(node) -> int:
    if isinstance(node, Leaf):
        return 1
    return 1 + sum(count_nodes(c) for c in node.children)


def count_leaves(node) -> int:
    if isinstance(node, Leaf):
        return 1
    return sum(count_leaves(c) for c in node.children)


@dataclass(frozen=True)
class SplitCandidate:
    feature: int
    score: AttributeScore


def best_split(X: np.ndarray, y: np.ndarray, w: np.ndarray, n_classes: int,
               names, min_leaf: float = 2.0, rows=None) -> SplitCandidate | None:
    """Pick the split attribute the way C4.5 does.

    Only attributes whose information gain reaches the average over all
    attributes with positive gain are eligible; among them the highest gain
    ratio wins, earlier features winning ties. ``rows`` selects the rows of
    ``X`` that ``y`` and ``w`` describe, avoiding a copy of the whole matrix.
    """
    if len(y) < 2 or len(np.unique(y[w > 0])) < 2:
        return None
    scores = [best_threshold(X[:, j] if rows is None else X[rows, j], y, w,
                             n_classes, names[j], min_leaf)
              for j in range(X.shape[1])]
    positive = [j for j, s in enumerate(scores) if s.info_gain > 0]
    if not positive:
        return None
    avg = math.fsum(scores[j].info_gain for j in positive) / len(positive)
    eligible = [j for j in positive if scores[j].info_gain >= avg - TIE_EPS]
    top = max(scores[j].gain_ratio for j in eligible)
    j = next(j for j in eligible if scores[j].gain_ratio >= top - TIE_EPS)
    return SplitCandidate(j, scores[j])


def pessimistic_error(f_errors: float, n_weight: float, confidence: float) -> float:
    """Upper confidence bound on the error rate of a leaf (normal approximation)."""
    if n_weight <= 0:
        raise ValueError("n_weight must be positive")
    z = NormalDist().inv_cdf(1.0 - confidence)
    f = f_errors / n_weight
    n = n_weight
    z2 = z * z
    radicand = max(f / n - f * f / n + z2 / (4 * n * n), 0.0)
    return (f + z2 / (2 * n) + z * math.sqrt(radicand)) / (1 + z2 / n)


def _leaf_errors(counts: np.ndarray, confidence: float) -> float:
    n = float(counts.sum())
    errors = n - float(counts.max())
    return n * pessimistic_error(errors, n, confidence)


def prune(node, confidence: float = 0.25):
    """Bottom-up subtree replacement.

    A split is collapsed into a leaf whenever the leaf's estimated errors do
    not exceed the summed estimates of the (already pruned) subtree. Returns
    the new node; the input tree is left untouched.
    """
    return _prune(node, confidence)[0]


def _prune(node, confidence):
    if isinstance(node, Leaf):
        return node, _leaf_errors(node.counts, confidence)
    children, subtree = [], 0.0
    for child in node.children:
        pruned, errs = _prune(child, confidence)
        children.append(pruned)
        subtree += errs
    as_leaf = _leaf_errors(node.counts, confidence)
    if as_leaf <= subtree + TIE_EPS:
        return Leaf(node.counts), as_leaf
    return Split(node.feature, node.threshold, children, node.fractions, node.counts), subtree


@dataclass(frozen=True, eq=False)
class DecisionTreeModel:
    root: object
    classes: tuple
    features: tuple
    schema_fingerprint: str
    params: TreeParams = TreeParams()
    metadata: dict = field(default_factory=dict)

    kind = "j48"

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Class distributions for each row of ``X`` (NaN = Missing)."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != len(self.features):
            raise SchemaMismatch(
                f"expected {len(self.features)} feature columns, got {X.shape}")
        out = np.zeros((len(X), len(self.classes)))
        if len(X):
            _descend(self.root, X, np.arange(len(X)), np.ones(len(X)), out)
        return out

    def classify(self, vector) -> dict:
        row = np.array([[np.nan if v is None else v for v in vector]], dtype=np.float64)
        probs = self.predict_proba(row)[0]
        return dict(zip(self.classes, probs.tolist()))

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    @property
    def node_count(self) -> int:
        return count_nodes(self.root)

    def to_dict(self) -> dict:
        return {"tree": _node_to_dict(self.root, self.features),
                "params": {"min_leaf_weight": self.params.min_leaf_weight,
                           "confidence": self.params.confidence,
                           "pruning": self.params.pruning,
                           "max_depth": self.params.max_depth}}

    @classmethod
    def from_dict(cls, doc: dict, classes, features, fingerprint, metadata):
        params = TreeParams(**doc["params"])
        index = {n: i for i, n in enumerate(features)}
        root = _node_from_dict(doc["tree"], index, len(classes))
        return cls(root, tuple(classes), tuple(features), fingerprint, params, metadata)


def _descend(node, X, rows, weights, out):
    if isinstance(node, Leaf):
        out[rows] += weights[:, None] * node.probabilities()[None, :]
        return
    col = X[rows, node.feature]
    known = ~np.isnan(col)
    missing = ~known
    go_left = known & (col <= node.threshold)
    go_right = known & (col > node.threshold)
    for child, mask, frac in ((node.children[0], go_left, node.fractions[0]),
                              (node.children[1], go_right, node.fractions[1])):
        r = np.concatenate([rows[mask], rows[missing]])
        wt = np.concatenate([weights[mask], weights[missing] * frac])
        if len(r):
            _descend(child, X, r, wt, out)


def _node_to_dict(node, features):
    counts = [float(c) for c in node.counts]
    if isinstance(node, Leaf):
        return {"counts": counts}
    return {"feature": features[node.feature], "threshold": node.threshold,
            "fractions": list(node.fractions), "counts": counts,
            "children": [_node_to_dict(c, features) for c in node.children]}


def _node_from_dict(doc, index, n_classes):
    counts = np.asarray(doc["counts"], dtype=np.float64)
    if counts.shape != (n_classes,) or counts.sum() <= 0:
        raise ValueError("node class counts malformed")
    if "children" not in doc:
        return Leaf(counts)
    children = [_node_from_dict(c, index, n_classes) for c in doc["children"]]
    if len(children) != 2:
        raise ValueError("split nodes need exactly two children")
    return Split(index[doc["feature"]], float(doc["threshold"]), children,
                 tuple(float(f) for f in doc["fractions"]), counts)


def _grow(X, y, rows, weights, n_classes, names, params, depth):
    yr = y[rows]
    counts = np.bincount(yr, weights=weights, minlength=n_classes)
    total = counts.sum()
    if (np.count_nonzero(counts) <= 1 or total < 2 * params.min_leaf_weight - WEIGHT_EPS
            or (params.max_depth is not None and depth >= params.max_depth)):
        return Leaf(counts)
    # Score splits over the classes present here only; deep nodes usually hold few.
    present, local_y = np.unique(yr, return_inverse=True)
    cand = best_split(X, local_y.ravel(), weights, len(present), names,
                      params.min_leaf_weight, rows)
    if cand is None:
        return Leaf(counts)
    col = X[rows, cand.feature]
    thr = cand.score.threshold
    known = ~np.isnan(col)
    missing = ~known
    left = known & (col <= thr)
    right = known & (col > thr)
    wl = weights[left].sum()
    wr = weights[right].sum()
    fractions = (float(wl / (wl + wr)), float(wr / (wl + wr)))
    children = []
    for mask, frac in ((left, fractions[0]), (right, fractions[1])):
        child_rows = np.concatenate([rows[mask], rows[missing]])
        child_w = np.concatenate([weights[mask], weights[missing] * frac])
        children.append(_grow(X, y, child_rows, child_w, n_classes, names,
                              params, depth + 1))
    return Split(cand.feature, thr, children, fractions, counts)


def train(dataset: Dataset, params: TreeParams = TreeParams(),
          metadata: dict | None = None) -> DecisionTreeModel:
    """Induce a tree from ``dataset``; prune it when ``params.pruning`` is set."""
    if len(dataset) == 0:
        raise ValueError("cannot train on an empty dataset")
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 20000))
    try:
        root = _grow(dataset.X, dataset.y, np.arange(len(dataset)),
                     dataset.weights.copy(), len(dataset.classes), dataset.schema.names,
                     params, 0)
        if params.pruning:
            root = prune(root, params.confidence)
    finally:
        sys.setrecursionlimit(limit)
    return DecisionTreeModel(root, dataset.classes, tuple(dataset.schema.names),
                             dataset.schema.fingerprint(), params, dict(metadata or {}))
