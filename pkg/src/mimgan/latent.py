"""Latent inversion: find ``z`` minimising the generator-fit error for ``x``.

The fit error is

    J(x, z) = (1 - lam) * ||x - G(z)||_p + lam * H_ce(D(G(z)), beta)

with ``H_ce`` the sigmoid cross entropy applied to the discriminator output.
Rows are optimised independently with Adam; a batch is split into fixed-size
chunks so results do not depend on how many worker threads are used.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .nn import Mlp, _sigmoid, backward, forward

__all__ = [
    "InversionParams",
    "InversionError",
    "sigmoid_ce",
    "sigmoid_ce_grad",
    "j_error",
    "j_error_grad",
    "invert_batch",
    "invert_latent",
]


class InversionError(RuntimeError):
    pass


@dataclass(frozen=True)
class InversionParams:
    iterations: int = 200
    restarts: int = 3
    lr: float = 0.003
    p_norm: int = 2
    lam: float = 0.1
    beta: float = 1.0
    chunk_size: int = 256

    def __post_init__(self):
        if self.iterations < 1 or self.restarts < 1:
            raise ValueError("iterations and restarts must be positive")
        if self.p_norm < 1:
            raise ValueError("p_norm must be a positive integer")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lam must lie in [0, 1]")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be positive")


def sigmoid_ce(d_out, beta: float = 1.0):
    """``-beta ln s(u) - (1 - beta) ln(1 - s(u))`` in softplus form."""
    u = np.asarray(d_out, dtype=np.float64)
    out = beta * np.logaddexp(0.0, -u) + (1.0 - beta) * np.logaddexp(0.0, u)
    return float(out) if out.ndim == 0 else out


def sigmoid_ce_grad(d_out, beta: float = 1.0):
    return _sigmoid(np.asarray(d_out, dtype=np.float64)) - beta


def _pnorm(r: np.ndarray, p: int) -> np.ndarray:
    if p == 2:
        return np.sqrt(np.sum(r * r, axis=1))
    return np.sum(np.abs(r) ** p, axis=1) ** (1.0 / p)


def _pnorm_grad(r: np.ndarray, norm: np.ndarray, p: int) -> np.ndarray:
    # subgradient 0 at r = 0
    safe = np.where(norm > 0, norm, 1.0)[:, None]
    if p == 2:
        g = r / safe
    else:
        g = np.sign(r) * np.abs(r) ** (p - 1) / safe ** (p - 1)
    return np.where(norm[:, None] > 0, g, 0.0)


def j_error(x, z, gan, params: InversionParams):
    """Fit error for one sample (vectors) or row-wise for matrices."""
    j, _ = _j_and_grad(np.atleast_2d(x), np.atleast_2d(z), gan, params, need_grad=False)
    return float(j[0]) if np.ndim(x) == 1 else j


def j_error_grad(x, z, gan, params: InversionParams):
    j, g = _j_and_grad(np.atleast_2d(x), np.atleast_2d(z), gan, params, need_grad=True)
    if np.ndim(z) == 1:
        return float(j[0]), g[0]
    return j, g


def _j_and_grad(x, z, gan, params, need_grad=True):
    gen: Mlp = gan.generator
    x = np.asarray(x, dtype=np.float64)
    if x.shape[1] != gen.output_dim or z.shape[1] != gen.input_dim:
        raise ValueError(
            f"dimension mismatch: x {x.shape}, z {z.shape} for generator "
            f"{gen.input_dim}->{gen.output_dim}")
    lam = params.lam
    gz, g_tape = forward(gen, z)
    r = gz - x
    norm = _pnorm(r, params.p_norm)
    j = (1.0 - lam) * norm
    d_tape = None
    if lam > 0:
        d_out, d_tape = forward(gan.discriminator, gz)
        d_out = d_out[:, 0]
        j = j + lam * sigmoid_ce(d_out, params.beta)
    if not need_grad:
        return j, None
    dg = (1.0 - lam) * _pnorm_grad(r, norm, params.p_norm)
    if lam > 0:
        dd = lam * sigmoid_ce_grad(d_out, params.beta)
        _, dx = backward(gan.discriminator, d_tape, dd[:, None], param_grads=False)
        dg = dg + dx
    _, dz = backward(gen, g_tape, dg, param_grads=False)
    return j, dz


def _initial_z(seed: int, index: int, restart: int, dim: int) -> np.ndarray:
    return np.random.default_rng([seed, index, restart]).uniform(-1.0, 1.0, dim)


def _invert_chunk(x, indices, gan, params, seed):
    n, latent = x.shape[0], gan.generator.input_dim
    best_j = np.full(n, np.inf)
    best_z = np.full((n, latent), np.nan)
    b1, b2, eps = 0.9, 0.999, 1e-8
    for r in range(params.restarts):
        z = np.stack([_initial_z(seed, int(i), r, latent) for i in indices])
        m = np.zeros_like(z)
        v = np.zeros_like(z)
        alive = np.ones(n, dtype=bool)
        for t in range(1, params.iterations + 1):
            with np.errstate(over="ignore", invalid="ignore"):
                _, g = _j_and_grad(x, z, gan, params)
            bad = ~np.all(np.isfinite(g), axis=1)
            if bad.any():
                alive &= ~bad
                g[bad] = 0.0
            m = b1 * m + (1 - b1) * g
            v = b2 * v + (1 - b2) * g * g
            step = params.lr * (m / (1 - b1 ** t)) / (np.sqrt(v / (1 - b2 ** t)) + eps)
            z = np.where(alive[:, None], z - step, z)
        with np.errstate(over="ignore", invalid="ignore"):
            j, _ = _j_and_grad(x, z, gan, params, need_grad=False)
        ok = alive & np.isfinite(j) & np.all(np.isfinite(z), axis=1)
        better = ok & (j < best_j)
        best_j[better] = j[better]
        best_z[better] = z[better]
    return best_z, best_j


def invert_batch(x, gan, params: InversionParams = InversionParams(), seed: int = 0,
                 indices=None, n_jobs: int = 1):
    """Invert every row of ``x``.

    Row ``i`` starts restart ``r`` from a draw seeded by ``(seed, indices[i], r)``.
    Returns ``(z_opt, j_opt)``; rows where every restart diverged get NaN
    ``z`` and ``inf`` ``j``.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    indices = np.arange(x.shape[0]) if indices is None else np.asarray(indices)
    bounds = range(0, x.shape[0], params.chunk_size)
    jobs = [(x[s:s + params.chunk_size], indices[s:s + params.chunk_size]) for s in bounds]

    def run(job):
        return _invert_chunk(job[0], job[1], gan, params, seed)

    if n_jobs > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]
    if not results:
        return np.empty((0, gan.generator.input_dim)), np.empty(0)
    return np.vstack([r[0] for r in results]), np.concatenate([r[1] for r in results])


def invert_latent(x, gan, params: InversionParams = InversionParams(), seed: int = 0,
                  index: int = 0) -> np.ndarray:
    """Best ``z`` for a single sample over ``params.restarts`` Adam descents."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("invert_latent takes a single sample; use invert_batch for matrices")
    z, j = invert_batch(x[None, :], gan, params, seed, indices=[index])
    if not np.isfinite(j[0]):
        raise InversionError(f"all {params.restarts} restarts diverged for sample {index}")
    return z[0]
