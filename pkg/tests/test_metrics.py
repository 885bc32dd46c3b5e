import numpy as np
import pytest
from hypothesis import given, strategies as st

from mimgan.detection import ContaminationQuantile, decide, normalize_scores
from mimgan.metrics import (ConfusionCounts, confusion, evaluate, mean_std, point_metrics,
                            roc_auc, roc_curve)
from oracles import brute_auc, hand_confusion


def test_confusion_examples():
    assert confusion([1, 0], [1, 0]) == ConfusionCounts(tp=1, fp=0, tn=1, fn=0)
    assert confusion([0, 0, 0], [1, 1, 1]).fp == 3
    c = confusion([1, 1, 0, 0, 0, 1, 0, 0, 0, 0], [1, 1, 1, 0, 0, 0, 0, 0, 0, 0], 1)
    assert (c.tp, c.fp, c.fn, c.tn) == (2, 1, 1, 6)


def test_confusion_validation():
    with pytest.raises(ValueError):
        confusion([1, 0], [1])
    with pytest.raises(ValueError):
        confusion([1, 2], [1, 0])


@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=40),
       st.integers(0, 1))
def test_confusion_matches_hand_count(pairs, positive):
    truth, pred = zip(*pairs)
    c = confusion(truth, pred, positive)
    assert (c.tp, c.fp, c.tn, c.fn) == hand_confusion(truth, pred, positive)
    assert c.total == len(pairs)


def test_point_metric_examples():
    m = point_metrics(ConfusionCounts(tp=2, fp=1, tn=6, fn=1))
    assert (m.precision, m.recall, m.f1, m.accuracy) == (2 / 3, 2 / 3, pytest.approx(2 / 3), 0.8)
    m = point_metrics(ConfusionCounts(0, 0, 5, 0))
    assert m.precision == 0.0 and m.accuracy == 1.0 and "precision" in m.degenerate
    m = point_metrics(ConfusionCounts(7, 0, 0, 0))
    assert (m.precision, m.recall, m.f1, m.accuracy) == (1.0, 1.0, 1.0, 1.0) and not m.degenerate


def test_auc_examples():
    assert roc_auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1])[1] == 1.0
    assert roc_auc([0.5] * 6, [0, 1, 0, 1, 1, 0])[1] == 0.5
    assert roc_auc([0.9, 0.8, 0.4, 0.3], [1, 0, 1, 0])[1] == 0.75


def test_auc_needs_both_classes():
    with pytest.raises(ValueError):
        roc_auc([0.1, 0.2], [1, 1])


def test_auc_equals_brute_force_on_100_instances():
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 80))
        labels = rng.integers(0, 2, n)
        labels[0], labels[1] = 0, 1
        # coarse rounding creates plenty of ties
        scores = np.round(rng.normal(size=n), int(rng.integers(0, 3)))
        worst = max(worst, abs(roc_auc(scores, labels)[1] - brute_auc(scores, labels)))
    assert worst < 1e-12


@given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=4, max_size=30, unique=True),
       st.randoms())
def test_auc_reflection(scores, rnd):
    labels = [i % 2 for i in range(len(scores))]
    rnd.shuffle(labels)
    a = roc_auc(scores, labels)[1]
    b = roc_auc([-s for s in scores], labels)[1]
    assert a + b == pytest.approx(1.0, abs=1e-12)


@given(st.lists(st.floats(0, 1), min_size=3, max_size=30), st.randoms())
def test_roc_shape(scores, rnd):
    labels = [i % 2 for i in range(len(scores))]
    rnd.shuffle(labels)
    fpr, tpr, thr = roc_curve(scores, labels)
    assert (fpr[0], tpr[0]) == (0.0, 0.0) and (fpr[-1], tpr[-1]) == (1.0, 1.0)
    assert np.all(np.diff(fpr) >= 0) and np.all(np.diff(tpr) >= 0)
    assert thr[0] == np.inf
    assert 0.0 <= roc_auc(scores, labels)[1] <= 1.0


@given(st.lists(st.floats(-50, 50), min_size=10, max_size=40, unique=True), st.randoms())
def test_point_metrics_invariant_under_monotone_transform(scores, rnd):
    labels = [1 if i < 3 else 0 for i in range(len(scores))]
    rnd.shuffle(labels)
    rule = ContaminationQuantile(0.2)
    s = np.array(scores)
    a = decide(normalize_scores(s), rule)
    b = decide(normalize_scores(np.exp(s / 25.0) * 3 + 1), rule)
    assert point_metrics(confusion(labels, a)) == point_metrics(confusion(labels, b))


def test_evaluate_reports_both_conventions():
    report = evaluate([0.9, 0.1, 0.2, 0.8], [1, 0, 0, 0], [1, 0, 0, 1], reconstruction_error=0.5)
    assert set(report.counts) == {"anomaly_positive", "normal_positive"}
    assert report.counts["anomaly_positive"].tp == 1
    assert report.counts["normal_positive"].tp == 2
    js = report.to_json()
    assert js["auc"] == 1.0 and js["reconstruction_error"] == 0.5
    assert js["roc"]["fpr"][0] == 0.0


def test_mean_std():
    assert mean_std([1.0, 3.0]) == {"mean": 2.0, "std": 1.0, "n": 2}
