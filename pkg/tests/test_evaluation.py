import csv
import io
import json
from collections import Counter
from importlib import resources

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dfp.evaluation import (Metrics, ReportRow, SplitSpec, comparison_report, cross_validate,
                            evaluate, load_cited, load_literature, measured_row,
                            metrics_from_predictions, seed_sweep, split_dataset, write_report)
from dfp.table import train_decision_table
from dfp.tree import SchemaMismatch, TreeParams, train

from conftest import make_dataset, random_dataset


def labelled(labels, n_features=1, values=None):
    rows = [(values[i] if values else 0,) * n_features + (c,) for i, c in enumerate(labels)]
    return make_dataset(rows, [f"f{j}" for j in range(n_features)])


def row_ids(ds):
    return sorted(int(v) for v in ds.X[:, 0])


# --- splitting --------------------------------------------------------------

def test_split_sizes():
    ds = labelled(["a"] * 100, values=list(range(100)))
    train_part, test_part = split_dataset(ds, SplitSpec(0.8, 42))
    assert (len(train_part), len(test_part)) == (80, 20)


def test_split_is_deterministic_and_seed_dependent():
    ds = labelled(["a"] * 50, values=list(range(50)))
    a = split_dataset(ds, SplitSpec(seed=7))
    b = split_dataset(ds, SplitSpec(seed=7))
    c = split_dataset(ds, SplitSpec(seed=8))
    assert a[0] == b[0] and a[1] == b[1]
    assert row_ids(a[1]) != row_ids(c[1])


def test_stratified_keeps_class_proportions():
    ds = labelled(["a"] * 90 + ["b"] * 10, values=list(range(100)))
    train_part, test_part = split_dataset(ds, SplitSpec(0.8, 3, stratified=True))
    for part in (train_part, test_part):
        counts = Counter(part.labels)
        assert abs(counts["b"] - 0.1 * len(part)) <= 1
        assert abs(counts["a"] - 0.9 * len(part)) <= 1


@pytest.mark.parametrize("fraction", [0.0, 1.0, -0.5, 2])
def test_fraction_bounds(fraction):
    with pytest.raises(ValueError):
        SplitSpec(fraction)


def test_empty_partition_is_an_error():
    with pytest.raises(ValueError):
        split_dataset(labelled(["a"] * 3, values=[0, 1, 2]), SplitSpec(0.2))
    with pytest.raises(ValueError):
        split_dataset(labelled(["a"]), SplitSpec())


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 80), st.floats(0.05, 0.95), st.integers(0, 2**63 - 1), st.booleans(),
       st.integers(1, 4))
def test_partition_soundness(n, fraction, seed, stratified, k):
    labels = [f"c{i % k}" for i in range(n)]
    ds = labelled(labels, values=list(range(n)))
    try:
        train_part, test_part = split_dataset(ds, SplitSpec(fraction, seed, stratified))
    except ValueError:
        return
    ids = row_ids(train_part) + row_ids(test_part)
    assert sorted(ids) == list(range(n))
    assert not set(row_ids(train_part)) & set(row_ids(test_part))
    for part in (train_part, test_part):
        assert all(labels[int(v)] == c for v, c in zip(part.X[:, 0], part.labels))


# --- metrics ----------------------------------------------------------------

def test_majority_model_on_70_30_data():
    ds = labelled(["a"] * 70 + ["b"] * 30)
    model = train(ds)
    m = evaluate(model, ds)
    assert m.accuracy == 0.7
    assert m.confusion_matrix == [[70, 0], [30, 0]]
    assert m.per_class["a"].recall == 1.0 and m.per_class["b"].recall == 0.0
    dt = evaluate(train_decision_table(ds), ds)
    assert dt.accuracy == 0.7


def test_perfect_model_gives_diagonal_matrix(weather):
    model = train(weather, TreeParams(min_leaf_weight=1.0, pruning=False))
    m = evaluate(model, weather)
    assert m.accuracy == 1.0
    cm = np.array(m.confusion_matrix)
    assert (cm == np.diag(np.diag(cm))).all() and cm.sum() == len(weather)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("abcd"), st.sampled_from("abcde")), min_size=1,
                max_size=60))
def test_metrics_internal_consistency(pairs):
    actual, predicted = zip(*pairs)
    m = metrics_from_predictions(actual, predicted)
    cm = np.array(m.confusion_matrix)
    assert cm.sum() == m.instance_count == len(pairs)
    assert m.accuracy == pytest.approx(np.trace(cm) / cm.sum())
    for i, c in enumerate(m.classes):
        row = cm[i].sum()
        assert m.per_class[c].support == row
        if row:
            assert m.per_class[c].recall == pytest.approx(cm[i, i] / row)
        col = cm[:, i].sum()
        if col:
            assert m.per_class[c].precision == pytest.approx(cm[i, i] / col)


def test_metrics_json_round_trip():
    m = metrics_from_predictions(["a", "b", "b"], ["a", "a", "b"], model_kind="j48",
                                 dataset_name="toy", feature_count=3)
    doc = json.loads(m.to_json())
    assert doc["format"] == "dfp-metrics" and doc["version"] == 1
    assert Metrics.from_dict(doc) == m
    with pytest.raises(ValueError):
        Metrics.from_dict({**doc, "version": 99})


def test_evaluate_reorders_columns_by_name(weather):
    model = train(weather)
    shuffled = weather.select_features(list(reversed(weather.schema.names)))
    assert evaluate(model, shuffled).accuracy == evaluate(model, weather).accuracy


def test_evaluate_rejects_missing_features(weather):
    model = train(weather, TreeParams(min_leaf_weight=1.0, pruning=False))
    used = weather.select_features(["temperature"])
    with pytest.raises(SchemaMismatch):
        evaluate(model, used)


def test_cross_validation_and_seed_sweep():
    rng = np.random.default_rng(5)
    ds = random_dataset(rng, 60, 3, n_values=4, n_classes=3, missing=0.0)
    folds = cross_validate(ds, train, folds=5, seed=1)
    assert sum(m.instance_count for m in folds) == 60
    accs, mean, std = seed_sweep(ds, train, range(10))
    assert len(accs) == 10 and mean == pytest.approx(np.mean(accs))
    assert std == pytest.approx(np.std(accs, ddof=1))


# --- reports ----------------------------------------------------------------

def _lit(source):
    return [r for r in load_literature() if r.source == source]


def test_literature_row_for_16():
    (row,) = _lit("[16]")
    assert row.cells() == ["[16]", "100^Pkt × 2^Feat", "21 UNSW", "98.54% UNSW"]


def test_proposed_model_rows():
    rows = _lit("Proposed DFP Model")
    assert [r.fingerprint for r in rows] == ["1^Pkt × 22^Feat"] * 2
    assert [r.performance for r in rows] == ["89.61% IoT Sentinel", "96.33% UNSW"]
    report = comparison_report([])
    merged = [c for c in report.grouped_rows() if c[0] == "Proposed DFP Model"]
    assert merged[0][1] == "1^Pkt × 22^Feat"
    assert merged[0][3] == "89.61% IoT Sentinel / 96.33% UNSW"


def test_report_reproduces_literature_verbatim():
    text = resources.files("dfp").joinpath("data", "literature.csv").read_text(encoding="utf-8")
    expected = [list(r.values()) for r in csv.DictReader(io.StringIO(text))]
    out = list(csv.reader(io.StringIO(comparison_report([]).to_csv())))
    assert out[0] == ["Source", "Fingerprint", "Devices/Dataset", "Performance"]
    assert out[1:] == expected


def test_measured_row_has_two_decimals():
    m = metrics_from_predictions(["a"] * 3, ["a", "a", "b"], model_kind="j48",
                                 dataset_name="UNSW", feature_count=21)
    row = measured_row(m)
    assert row.performance == "66.67% UNSW"
    assert row.fingerprint == "1^Pkt × 21^Feat"


def test_measured_results_are_set_against_all_cited_values():
    m = metrics_from_predictions(["a"] * 4, ["a"] * 4, model_kind="j48",
                                 dataset_name="IoT Sentinel", feature_count=21)
    report = comparison_report([m])
    (_, cited), = report.comparisons
    assert sorted(c.accuracy for c in cited) == [83.7, 83.9]
    md = report.to_markdown()
    assert "| j48 | IoT Sentinel | 100.00% | 83.7% | +16.30 pp |" in md
    assert "This run (j48)" in md


def test_cited_values_cover_every_stated_number():
    got = {(c.model_kind, c.dataset, c.accuracy) for c in load_cited()}
    assert {("j48", "IoT Sentinel", 83.7), ("j48", "IoT Sentinel", 83.9),
            ("j48", "UNSW", 98.2), ("dtable", "IoT Sentinel", 89.61),
            ("dtable", "UNSW", 96.33)} <= got


def test_report_accepts_ready_rows_and_writes_files(tmp_path):
    extra = ReportRow("X", "1^Pkt × 1^Feat", "2 toy", "50.00% toy", measured=True)
    report = comparison_report([extra], literature=[])
    write_report(report, tmp_path / "r.md")
    write_report(report, tmp_path / "r.csv")
    assert "| X | 1^Pkt × 1^Feat | 2 toy | 50.00% toy |" in (tmp_path / "r.md").read_text()
    assert (tmp_path / "r.csv").read_text().splitlines()[1] == "X,1^Pkt × 1^Feat,2 toy,50.00% toy"
