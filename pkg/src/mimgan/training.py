"""Alternating discriminator/generator training for any objective kind."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .data import Scaler
from .latent import InversionParams, invert_batch
from .nn import (SIGMOID, TANH, Activation, Mlp, adam_init, adam_step,
                 backward, forward, init_mlp, load_mlp, save_mlp)
from .objectives import GanKind, Role, batch_loss, enforce_lipschitz, loss_grad

__all__ = [
    "TrainConfig",
    "TrainedGan",
    "TrainingDiverged",
    "default_latent_dim",
    "train",
    "sample",
    "reconstruction_error",
    "save_gan",
    "load_gan",
]


class TrainingDiverged(RuntimeError):
    def __init__(self, iteration: int, player: str, loss: float):
        super().__init__(f"non-finite {player} loss {loss!r} at iteration {iteration}")
        self.iteration = iteration
        self.player = player
        self.loss = loss


def default_latent_dim(feature_dim: int) -> int:
    return max(8, math.ceil(feature_dim / 4))


@dataclass(frozen=True)
class TrainConfig:
    kind: GanKind = GanKind.MIM
    iterations: int = 1000
    batch_size: int = 64
    latent_dim: int | None = None  # None -> default_latent_dim(d)
    lr: float = 1e-4
    d_steps: int = 1
    g_steps: int = 1
    hidden_widths: tuple[int, ...] = (64, 32)
    seed: int = 0
    clip: float = 0.01
    leaky_slope: float = 0.2

    def __post_init__(self):
        object.__setattr__(self, "kind", GanKind.parse(self.kind))
        object.__setattr__(self, "hidden_widths", tuple(int(w) for w in self.hidden_widths))
        if self.iterations < 1 or self.batch_size < 1:
            raise ValueError("iterations and batch_size must be positive")
        if self.latent_dim is not None and self.latent_dim < 1:
            raise ValueError("latent_dim must be positive")
        if self.d_steps < 1 or self.g_steps < 1:
            raise ValueError("step counts must be positive")
        if any(w < 1 for w in self.hidden_widths):
            raise ValueError("hidden widths must be positive")
        if self.kind is GanKind.WGAN and self.clip <= 0:
            raise ValueError("WGAN clip must be positive")

    def resolved(self, feature_dim: int) -> "TrainConfig":
        if self.latent_dim is not None:
            return self
        return replace(self, latent_dim=default_latent_dim(feature_dim))

    def to_json(self) -> dict:
        out = asdict(self)
        out["kind"] = self.kind.value
        out["hidden_widths"] = list(self.hidden_widths)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "TrainConfig":
        known = {k: v for k, v in obj.items() if k in cls.__dataclass_fields__}
        return cls(**known)


@dataclass
class TrainedGan:
    discriminator: Mlp
    generator: Mlp
    config: TrainConfig
    scaler: Scaler | None = None
    # rows of (iteration, mean d loss, mean g loss)
    history: list[tuple[int, float, float]] = field(default_factory=list)

    @property
    def feature_dim(self) -> int:
        return self.generator.output_dim

    @property
    def latent_dim(self) -> int:
        return self.generator.input_dim


def _build_nets(cfg: TrainConfig, d: int, rng: np.random.Generator):
    hidden = list(cfg.hidden_widths)
    leaky = Activation("leaky_relu", cfg.leaky_slope)
    hidden_acts = [leaky] * len(hidden)
    d_seed, g_seed = (int(s) for s in rng.integers(0, 2**31 - 1, size=2))
    disc = init_mlp(d_seed, [d] + hidden + [1], hidden_acts + [SIGMOID])
    gen = init_mlp(g_seed, [cfg.latent_dim] + hidden[::-1] + [d], hidden_acts + [TANH])
    return disc, gen


def _check(loss, iteration, player):
    if not math.isfinite(loss):
        raise TrainingDiverged(iteration, player, loss)


def train(config: TrainConfig, train_features, scaler: Scaler | None = None) -> TrainedGan:
    """Train D and G alternately: ``d_steps`` critic updates then ``g_steps``
    generator updates per iteration, latent draws uniform on ``[-1, 1]``.

    ``train_features`` must already be scaled into ``[-1, 1]``; it is never
    modified.
    """
    x = np.asarray(train_features, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("train_features must be a matrix")
    if np.max(np.abs(x)) > 1.0 + 1e-9:
        raise ValueError("train_features must be scaled into [-1, 1]")
    n, d = x.shape
    cfg = config.resolved(d)
    if n < cfg.batch_size:
        raise ValueError(f"need at least batch_size={cfg.batch_size} rows, got {n}")
    kind = cfg.kind
    rng = np.random.default_rng(cfg.seed)
    disc, gen = _build_nets(cfg, d, rng)
    opt_d = adam_init(disc.n_params, lr=cfg.lr)
    opt_g = adam_init(gen.n_params, lr=cfg.lr)
    history = []
    bs, latent = cfg.batch_size, cfg.latent_dim

    for it in range(cfg.iterations):
        d_losses, g_losses = [], []
        for _ in range(cfg.d_steps):
            real = x[rng.choice(n, bs, replace=False)]
            z = rng.uniform(-1.0, 1.0, size=(bs, latent))
            fake = forward(gen, z)[0]
            d_real, tape_r = forward(disc, real)
            d_fake, tape_f = forward(disc, fake)
            loss = batch_loss(kind, Role.DISCRIMINATOR, d_real, d_fake)
            _check(loss, it, "discriminator")
            g_r, g_f = loss_grad(kind, Role.DISCRIMINATOR, d_real, d_fake)
            grads = (backward(disc, tape_r, g_r[:, None])[0]
                     + backward(disc, tape_f, g_f[:, None])[0])
            params, opt_d = adam_step(opt_d, disc.get_flat(), grads)
            disc.set_flat(params)
            if kind is GanKind.WGAN:
                enforce_lipschitz(kind, disc, cfg.clip)
            d_losses.append(loss)
        for _ in range(cfg.g_steps):
            z = rng.uniform(-1.0, 1.0, size=(bs, latent))
            fake, tape_g = forward(gen, z)
            d_fake, tape_f = forward(disc, fake)
            loss = batch_loss(kind, Role.GENERATOR, None, d_fake)
            _check(loss, it, "generator")
            _, g_f = loss_grad(kind, Role.GENERATOR, None, d_fake)
            _, dx = backward(disc, tape_f, g_f[:, None], param_grads=False)
            grads, _ = backward(gen, tape_g, dx)
            params, opt_g = adam_step(opt_g, gen.get_flat(), grads)
            gen.set_flat(params)
            g_losses.append(loss)
        history.append((it, float(np.mean(d_losses)), float(np.mean(g_losses))))

    return TrainedGan(disc, gen, cfg, scaler, history)


def sample(gan: TrainedGan, n: int, seed: int = 0) -> np.ndarray:
    z = np.random.default_rng(seed).uniform(-1.0, 1.0, size=(n, gan.latent_dim))
    return forward(gan.generator, z)[0]


def reconstruction_error(gan: TrainedGan, test_features,
                         inversion: InversionParams = InversionParams(),
                         seed: int = 0, n_jobs: int = 1) -> float:
    """Mean over samples of ``min_z ||G(z) - x||_2``.

    Uses the inversion budget of ``inversion`` with the discriminator term
    switched off.  Samples whose inversion diverged are skipped; more than 10%
    skipped is an error.
    """
    x = np.atleast_2d(np.asarray(test_features, dtype=np.float64))
    if x.shape[0] == 0:
        raise ValueError("empty test set")
    params = replace(inversion, lam=0.0, p_norm=2)
    _, j = invert_batch(x, gan, params, seed, n_jobs=n_jobs)
    ok = np.isfinite(j)
    skipped = int((~ok).sum())
    if skipped > 0.1 * x.shape[0]:
        raise RuntimeError(f"latent inversion diverged for {skipped}/{x.shape[0]} samples")
    return float(np.mean(j[ok]))


def save_gan(gan: TrainedGan, directory, extra: dict | None = None) -> None:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    save_mlp(gan.discriminator, out / "discriminator.json")
    save_mlp(gan.generator, out / "generator.json")
    meta = {"train_config": gan.config.to_json(),
            "scaler": None if gan.scaler is None else gan.scaler.to_json()}
    if extra:
        meta.update(extra)
    (out / "config.json").write_text(json.dumps(meta, indent=2, sort_keys=True))
    with (out / "loss_history.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "d_loss", "g_loss"])
        for it, dl, gl in gan.history:
            w.writerow([it, repr(dl), repr(gl)])


def load_gan(directory) -> tuple[TrainedGan, dict]:
    """Load a checkpoint directory; returns the GAN and the raw config.json."""
    src = Path(directory)
    files = [src / n for n in ("discriminator.json", "generator.json", "config.json")]
    missing = [str(f) for f in files if not f.is_file()]
    if missing:
        raise FileNotFoundError(f"checkpoint not found: missing {', '.join(missing)}")
    meta = json.loads(files[2].read_text())
    scaler = Scaler.from_json(meta["scaler"]) if meta.get("scaler") else None
    history = []
    hist_path = src / "loss_history.csv"
    if hist_path.is_file():
        with hist_path.open(newline="") as fh:
            for row in csv.DictReader(fh):
                history.append((int(row["iteration"]), float(row["d_loss"]), float(row["g_loss"])))
    gan = TrainedGan(load_mlp(files[0]), load_mlp(files[1]),
                     TrainConfig.from_json(meta["train_config"]), scaler, history)
    return gan, meta
