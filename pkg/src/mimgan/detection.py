"""Unsupervised anomaly detection on top of a trained GAN.

A test sample is inverted into latent space, scored by

    S = (1 - eta) * J(x, z_opt) + eta * H_ce(D(x), beta)

min-max normalised over the test set and flagged when it exceeds a threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, SplitSpec, scale_apply, scale_fit, split
from .latent import (InversionError, InversionParams, invert_batch, invert_latent,
                     j_error, sigmoid_ce)
from .metrics import EvalReport, evaluate
from .nn import forward
from .training import TrainConfig, TrainedGan, reconstruction_error, train

__all__ = [
    "Fixed",
    "ContaminationQuantile",
    "ThresholdRule",
    "ScoreParams",
    "ScoredSample",
    "PipelineResult",
    "sigmoid_ce",
    "j_error",
    "invert_latent",
    "anomaly_score",
    "score_samples",
    "normalize_scores",
    "decide",
    "parse_rule",
    "run_pipeline",
]


@dataclass(frozen=True)
class Fixed:
    gamma: float

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"fixed threshold must lie in [0, 1], got {self.gamma}")


@dataclass(frozen=True)
class ContaminationQuantile:
    rate: float

    def __post_init__(self):
        if not 0.0 < self.rate < 1.0:
            raise ValueError(f"contamination rate must lie in (0, 1), got {self.rate}")


ThresholdRule = Fixed | ContaminationQuantile


def parse_rule(text: str) -> ThresholdRule | None:
    """``fixed:0.5``, ``quantile:0.05`` or ``contamination`` (returns None,
    meaning: use the dataset's own anomaly rate)."""
    text = text.strip().lower()
    if text in ("contamination", "auto"):
        return None
    name, _, value = text.partition(":")
    if name == "fixed":
        return Fixed(float(value))
    if name in ("quantile", "contamination"):
        return ContaminationQuantile(float(value))
    raise ValueError(f"unknown threshold rule {text!r}")


@dataclass(frozen=True)
class ScoreParams:
    eta: float = 0.05
    beta: float = 1.0
    inversion: InversionParams = field(default_factory=InversionParams)
    # None -> ContaminationQuantile at the dataset's anomaly rate
    rule: ThresholdRule | None = None

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")
        if isinstance(self.rule, (int, float)):
            object.__setattr__(self, "rule", Fixed(float(self.rule)))

    @property
    def inversion_with_beta(self) -> InversionParams:
        from dataclasses import replace
        return replace(self.inversion, beta=self.beta)


@dataclass(frozen=True)
class ScoredSample:
    index: int
    raw_score: float
    normalized_score: float
    predicted_label: int
    z_opt: np.ndarray
    true_label: int | None = None


def _disc_term(gan, x, beta):
    d_out = forward(gan.discriminator, np.atleast_2d(x))[0][:, 0]
    return sigmoid_ce(d_out, beta)


def score_samples(x, gan: TrainedGan, params: ScoreParams = ScoreParams(), seed: int = 0,
                  indices=None, n_jobs: int = 1):
    """Raw scores for every row; returns ``(scores, z_opt, j_opt)``."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    inv = params.inversion_with_beta
    z, j = invert_batch(x, gan, inv, seed, indices=indices, n_jobs=n_jobs)
    if not np.all(np.isfinite(j)):
        bad = np.flatnonzero(~np.isfinite(j))
        raise InversionError(f"latent inversion diverged for rows {bad.tolist()}")
    h = _disc_term(gan, x, params.beta)
    return (1.0 - params.eta) * j + params.eta * h, z, j


def anomaly_score(x, gan: TrainedGan, params: ScoreParams = ScoreParams(), seed: int = 0,
                  index: int = 0) -> float:
    x = np.asarray(x, dtype=np.float64)
    z = invert_latent(x, gan, params.inversion_with_beta, seed, index)
    j = j_error(x, z, gan, params.inversion_with_beta)
    h = float(_disc_term(gan, x, params.beta)[0])
    return (1.0 - params.eta) * j + params.eta * h


def normalize_scores(raw) -> np.ndarray:
    """Min-max onto [0, 1]; a constant vector maps to all zeros."""
    s = np.asarray(raw, dtype=np.float64)
    if s.size == 0:
        raise ValueError("cannot normalise an empty score vector")
    lo, hi = s.min(), s.max()
    if hi == lo:
        return np.zeros_like(s)
    return np.clip((s - lo) / (hi - lo), 0.0, 1.0)


def threshold(normalized, rule: ThresholdRule) -> float:
    if isinstance(rule, Fixed):
        return rule.gamma
    if isinstance(rule, ContaminationQuantile):
        return float(np.quantile(np.asarray(normalized, dtype=np.float64), 1.0 - rule.rate))
    raise TypeError(f"not a threshold rule: {rule!r}")


def decide(normalized, rule: ThresholdRule) -> np.ndarray:
    """Label 1 iff the score strictly exceeds the rule's threshold.

    For a contamination quantile the threshold is the linearly interpolated
    ``1 - rate`` quantile, so with distinct scores ``floor(rate*N)`` or
    ``ceil(rate*N)`` samples are flagged; samples tied at the threshold
    are never flagged.
    """
    s = np.asarray(normalized, dtype=np.float64)
    if np.any((s < 0) | (s > 1)):
        raise ValueError("normalised scores must lie in [0, 1]")
    return (s > threshold(s, rule)).astype(np.int64)


@dataclass
class PipelineResult:
    samples: list[ScoredSample]
    report: EvalReport | None
    gan: TrainedGan
    threshold: float


def run_pipeline(dataset: Dataset, config: TrainConfig,
                 score_params: ScoreParams = ScoreParams(),
                 split_spec: SplitSpec | None = None, seed: int = 0,
                 with_reconstruction: bool = False, n_jobs: int = 1) -> PipelineResult:
    """Split, scale, train on the mixed unlabeled training rows, score the test rows.

    Labels are only read after scoring, to build the evaluation report and,
    when no rule is given, to set the contamination rate.
    """
    if split_spec is None:
        split_spec = SplitSpec(n_train=int(round(0.7 * dataset.n)), seed=seed)
    train_ds, test_ds = split(dataset, split_spec)
    scaler = scale_fit(train_ds)
    x_train = scale_apply(scaler, train_ds.features, clip=1.0)
    x_test = scale_apply(scaler, test_ds.features)
    gan = train(config, x_train, scaler)

    raw, z, _ = score_samples(x_test, gan, score_params, seed=seed, n_jobs=n_jobs)
    norm = normalize_scores(raw)

    rule = score_params.rule
    if rule is None:
        if dataset.anomaly_rate is None or not 0 < dataset.anomaly_rate < 1:
            raise ValueError("no threshold rule given and the dataset has no usable anomaly rate")
        rule = ContaminationQuantile(dataset.anomaly_rate)
    gamma = threshold(norm, rule)
    pred = decide(norm, rule)

    report = None
    if test_ds.labels is not None and 0 < test_ds.labels.sum() < test_ds.n:
        recon = (reconstruction_error(gan, x_test, score_params.inversion, seed, n_jobs)
                 if with_reconstruction else None)
        report = evaluate(raw, pred, test_ds.labels, recon)
    truth = test_ds.labels
    samples = [ScoredSample(i, float(raw[i]), float(norm[i]), int(pred[i]), z[i],
                            None if truth is None else int(truth[i]))
               for i in range(test_ds.n)]
    return PipelineResult(samples, report, gan, gamma)
