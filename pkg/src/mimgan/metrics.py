"""Confusion counts, precision/recall/F1/accuracy, ROC and AUC."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

__all__ = [
    "ConfusionCounts",
    "PointMetrics",
    "EvalReport",
    "confusion",
    "point_metrics",
    "roc_curve",
    "roc_auc",
    "evaluate",
    "mean_std",
]


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class PointMetrics:
    precision: float
    recall: float
    f1: float
    accuracy: float
    # names of metrics whose denominator was zero (reported as 0)
    degenerate: tuple[str, ...] = ()


def _binary(labels, name):
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-d sequence")
    if not np.all((arr == 0) | (arr == 1)):
        raise ValueError(f"{name} must contain only 0 and 1")
    return arr.astype(np.int64)


def confusion(true_labels, predicted_labels, positive_class: int = 1) -> ConfusionCounts:
    truth = _binary(true_labels, "true_labels")
    pred = _binary(predicted_labels, "predicted_labels")
    if truth.shape != pred.shape:
        raise ValueError(f"length mismatch: {truth.size} labels vs {pred.size} predictions")
    if positive_class not in (0, 1):
        raise ValueError("positive_class must be 0 or 1")
    t = truth == positive_class
    p = pred == positive_class
    return ConfusionCounts(
        tp=int(np.sum(t & p)), fp=int(np.sum(~t & p)),
        tn=int(np.sum(~t & ~p)), fn=int(np.sum(t & ~p)))


def _ratio(num, den, name, flags):
    if den == 0:
        flags.append(name)
        return 0.0
    return num / den


def point_metrics(c: ConfusionCounts) -> PointMetrics:
    flags: list[str] = []
    precision = _ratio(c.tp, c.tp + c.fp, "precision", flags)
    recall = _ratio(c.tp, c.tp + c.fn, "recall", flags)
    f1 = _ratio(2 * precision * recall, precision + recall, "f1", flags)
    accuracy = _ratio(c.tp + c.tn, c.total, "accuracy", flags)
    return PointMetrics(precision, recall, f1, accuracy, tuple(flags))


def roc_curve(scores, true_labels, positive_class: int = 1):
    """ROC points from a sweep over the distinct scores, highest first.

    Returns ``(fpr, tpr, thresholds)``; the first point is ``(0, 0)`` with
    threshold ``+inf``.  A sample is called positive when ``score >= threshold``.
    """
    scores = np.asarray(scores, dtype=np.float64)
    truth = _binary(true_labels, "true_labels")
    if scores.shape != truth.shape:
        raise ValueError("scores and labels differ in length")
    pos = truth == positive_class
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC needs at least one positive and one negative sample")
    order = np.argsort(-scores, kind="mergesort")
    s = scores[order]
    p = pos[order]
    # last index of each run of equal scores
    ends = np.r_[np.flatnonzero(np.diff(s) != 0), s.size - 1]
    tps = np.cumsum(p)[ends]
    fps = (ends + 1) - tps
    tpr = np.r_[0.0, tps / n_pos]
    fpr = np.r_[0.0, fps / n_neg]
    thresholds = np.r_[np.inf, s[ends]]
    return fpr, tpr, thresholds


def roc_auc(scores, true_labels, positive_class: int = 1):
    """``((fpr, tpr, thresholds), auc)`` with a trapezoidal AUC.

    Tied scores produce a diagonal segment, i.e. half credit per tied pair,
    so the area equals the normalised Mann-Whitney statistic.
    """
    fpr, tpr, thr = roc_curve(scores, true_labels, positive_class)
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))
    return (fpr, tpr, thr), auc


@dataclass
class EvalReport:
    counts: dict[str, ConfusionCounts]
    metrics: dict[str, PointMetrics]
    auc: float
    roc: tuple[np.ndarray, np.ndarray, np.ndarray] = field(repr=False)
    reconstruction_error: float | None = None

    def to_json(self) -> dict:
        out = {
            "auc": self.auc,
            "conventions": {
                name: {"counts": asdict(self.counts[name]),
                       **{k: v for k, v in asdict(self.metrics[name]).items()
                          if k != "degenerate"},
                       "degenerate": list(self.metrics[name].degenerate)}
                for name in self.counts
            },
            "roc": {"fpr": self.roc[0].tolist(), "tpr": self.roc[1].tolist()},
        }
        if self.reconstruction_error is not None:
            out["reconstruction_error"] = self.reconstruction_error
        return out


# polarity conventions: which class counts as "positive"
CONVENTIONS = {"anomaly_positive": 1, "normal_positive": 0}


def evaluate(scores, predicted_labels, true_labels,
             reconstruction_error: float | None = None) -> EvalReport:
    """Metrics under both polarity conventions plus ROC/AUC on the scores.

    Higher scores mean "more anomalous"; the ROC treats anomalies as positive.
    """
    counts = {name: confusion(true_labels, predicted_labels, cls)
              for name, cls in CONVENTIONS.items()}
    metrics = {name: point_metrics(c) for name, c in counts.items()}
    roc, auc = roc_auc(scores, true_labels, 1)
    return EvalReport(counts, metrics, auc, roc, reconstruction_error)


def mean_std(values) -> dict:
    arr = np.asarray(values, dtype=np.float64)
    return {"mean": float(arr.mean()), "std": float(arr.std(ddof=0)), "n": int(arr.size)}
