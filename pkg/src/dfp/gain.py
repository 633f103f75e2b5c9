"""Entropy, gain ratio and attribute ranking.

Numeric attributes are scored by their best binary threshold, using the same
routine (``best_threshold``) that the decision tree uses to choose splits.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .dataset import Dataset, _text
from .schema import FeatureSchema, SchemaError

# Gains closer than this are treated as tied; the lower threshold wins.
TIE_EPS = 1e-12
# slack for weight comparisons, since fractional weights pick up rounding error
WEIGHT_EPS = 1e-9


def entropy(class_counts) -> float:
    """Shannon entropy in bits of a label->weight mapping (or plain sequence)."""
    counts = class_counts.values() if isinstance(class_counts, Mapping) else class_counts
    counts = [float(c) for c in counts]
    if any(c < 0 for c in counts):
        raise ValueError("class weights must be non-negative")
    total = math.fsum(counts)
    if total <= 0:
        return 0.0
    probs = [c / total for c in counts]
    h = -math.fsum(p * math.log2(p) for p in probs if p > 0)
    return max(h, 0.0)


def entropy_rows(counts: np.ndarray) -> np.ndarray:
    """Row-wise entropy (bits) of a ``(..., k)`` array of class weights.

    Uses H = log2(T) - sum(c log2 c) / T, which needs one log per cell.
    """
    counts = np.maximum(np.asarray(counts, dtype=np.float64), 0.0)
    total = counts.sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        clogc = counts * np.log2(counts)
        clogc[counts == 0] = 0.0
        h = np.log2(total) - clogc.sum(axis=-1) / total
    h = np.where(total > 0, h, 0.0)
    return np.maximum(h, 0.0)


@dataclass(frozen=True)
class AttributeScore:
    feature: str
    gain_ratio: float = 0.0
    info_gain: float = 0.0
    split_info: float = 0.0
    threshold: float | None = None
    left_weight: float = 0.0  # known weight at or below the threshold
    right_weight: float = 0.0
    missing_weight: float = 0.0


def best_threshold(x: np.ndarray, y: np.ndarray, w: np.ndarray, n_classes: int,
                   feature: str = "", min_leaf: float = 0.0) -> AttributeScore:
    """Best binary split of one numeric column.

    Candidates are midpoints between adjacent distinct known values. Missing
    values (NaN) shrink the gain by the known-weight fraction and form a third
    branch in the split information. With ``min_leaf`` > 0, thresholds that
    leave less known weight than that on either side are not candidates.
    """
    total = float(w.sum())
    known = ~np.isnan(x)
    xk, yk, wk = x[known], y[known], w[known]
    known_w = float(wk.sum())
    if total <= 0 or known_w <= 0 or len(xk) < 2:
        return AttributeScore(feature, missing_weight=total - known_w)
    uniq, inv = np.unique(xk, return_inverse=True)
    if len(uniq) < 2:
        return AttributeScore(feature, missing_weight=total - known_w)
    hist = np.bincount(inv * n_classes + yk, weights=wk,
                       minlength=len(uniq) * n_classes).reshape(len(uniq), n_classes)
    known_counts = hist.sum(axis=0)
    left = np.cumsum(hist, axis=0)[:-1]
    right = np.cumsum(hist[::-1], axis=0)[::-1][1:]
    wl = left.sum(axis=1)
    wr = right.sum(axis=1)
    valid = (wl > 0) & (wr > 0)
    if min_leaf > 0:
        valid &= (wl >= min_leaf - WEIGHT_EPS) & (wr >= min_leaf - WEIGHT_EPS)
    if not valid.any():
        return AttributeScore(feature, missing_weight=total - known_w)

    cond = (wl * entropy_rows(left) + wr * entropy_rows(right)) / known_w
    gains = (known_w / total) * (entropy_rows(known_counts) - cond)
    # gains within rounding distance of zero are zero, so no split is made on noise
    gains = np.where(gains > TIE_EPS, gains, 0.0)
    gains = np.where(valid, gains, -np.inf)
    best = int(np.argmax(gains >= gains.max() - TIE_EPS))
    gain = float(gains[best])
    missing_w = total - known_w
    parts = [wl[best], wr[best]] + ([missing_w] if missing_w > 0 else [])
    split_info = entropy(parts)
    ratio = gain / split_info if split_info > 0 else 0.0
    return AttributeScore(
        feature, ratio, gain, split_info,
        float((uniq[best] + uniq[best + 1]) / 2),
        float(wl[best]), float(wr[best]), missing_w)


def gain_ratio(dataset: Dataset, feature: str) -> AttributeScore:
    if feature not in dataset.schema:
        raise KeyError(f"unknown feature {feature!r}")
    col = dataset.X[:, dataset.schema.index(feature)]
    return best_threshold(col, dataset.y, dataset.weights, len(dataset.classes), feature)


def rank_features(dataset: Dataset) -> list[AttributeScore]:
    """Gain-ratio scores for every feature, best first; ties keep schema order."""
    if len(dataset) == 0:
        raise ValueError("cannot rank features of an empty dataset")
    scores = [gain_ratio(dataset, name) for name in dataset.schema.names]
    return sorted(scores, key=lambda s: -s.gain_ratio)


def top_k(ranking: Sequence[AttributeScore], k: int) -> list[str]:
    if k < 1:
        raise ValueError("k must be at least 1")
    return [s.feature for s in ranking[:k]]


def apply_removal(schema: FeatureSchema, remove: Sequence[str]) -> FeatureSchema:
    """Drop the named features, keeping the order of the rest."""
    dropped = set()
    for name in remove:
        if name not in schema or name in dropped:
            raise SchemaError(f"cannot remove {name!r}: not in schema")
        dropped.add(name)
    return FeatureSchema(tuple(f for f in schema if f.name not in dropped))


RANKING_HEADER = ["feature", "gain_ratio", "info_gain", "split_info", "threshold"]


def write_ranking(ranking: Sequence[AttributeScore], sink) -> None:
    with _text(sink, "w") as text:
        writer = csv.writer(text, lineterminator="\n")
        writer.writerow(RANKING_HEADER)
        for s in ranking:
            writer.writerow([s.feature, repr(s.gain_ratio), repr(s.info_gain),
                             repr(s.split_info),
                             "" if s.threshold is None else repr(s.threshold)])


def read_ranking(source) -> list[AttributeScore]:
    with _text(source, "r") as text:
        reader = csv.DictReader(text)
        if reader.fieldnames != RANKING_HEADER:
            raise ValueError(f"ranking header must be {','.join(RANKING_HEADER)}")
        return [
            AttributeScore(row["feature"], float(row["gain_ratio"]),
                           float(row["info_gain"]), float(row["split_info"]),
                           float(row["threshold"]) if row["threshold"] else None)
            for row in reader
        ]
