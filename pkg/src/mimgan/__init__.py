"""GANs with an exponential-information objective, closed-form checks and an
unsupervised anomaly detector built on latent inversion."""

from .data import Dataset, SplitSpec, load_csv, make_two_cluster, save_csv
from .detection import (ContaminationQuantile, Fixed, ScoreParams, ScoredSample, anomaly_score,
                        decide, normalize_scores, run_pipeline, score_samples)
from .latent import InversionParams, invert_batch, invert_latent, j_error, sigmoid_ce
from .metrics import EvalReport, evaluate, roc_auc
from .objectives import GanKind, Role, batch_loss, loss_grad
from .theory_checks import run_theory_checks
from .training import TrainConfig, TrainedGan, load_gan, reconstruction_error, save_gan, train

__version__ = "0.1.0"

__all__ = [
    "ContaminationQuantile", "Dataset", "EvalReport", "Fixed", "GanKind", "InversionParams",
    "Role", "ScoreParams", "ScoredSample", "SplitSpec", "TrainConfig", "TrainedGan",
    "anomaly_score", "batch_loss", "decide", "evaluate", "invert_batch", "invert_latent",
    "j_error", "load_csv", "load_gan", "loss_grad", "make_two_cluster", "normalize_scores",
    "reconstruction_error", "roc_auc", "run_pipeline", "run_theory_checks", "save_csv",
    "save_gan", "score_samples", "sigmoid_ce", "train",
]
