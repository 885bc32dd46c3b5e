"""Unified two-player objective ``L(D, G) = E_P[f(D(x))] + E_Pg[g(D(G(z)))]``.

``f`` and ``g`` are kept with the signs of the usual summary table (so for
MIM ``f(u) = -exp(1 - u)``, ``g(u) = -exp(u)``).  The table writes each game
either as min_G max_D or as max_G min_D; in every case the discriminator
ends up minimising ``-L`` and the generator minimising ``E[g(D(G(z)))]``, which
is what :func:`batch_loss` returns.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .nn import Mlp

__all__ = [
    "GanKind",
    "Role",
    "EPS_CLAMP",
    "f_term",
    "g_term",
    "f_prime",
    "g_prime",
    "batch_loss",
    "loss_grad",
    "enforce_lipschitz",
]

EPS_CLAMP = 1e-7


class GanKind(str, Enum):
    ORIGINAL = "original"
    LSGAN = "lsgan"
    WGAN = "wgan"
    MIM = "mim"

    @classmethod
    def parse(cls, value) -> "GanKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(
                f"unknown GAN kind {value!r}; expected one of {[k.value for k in cls]}") from None


class Role(str, Enum):
    DISCRIMINATOR = "discriminator"
    GENERATOR = "generator"


def _as_array(u):
    return np.asarray(u, dtype=np.float64)


def _clamp_prob(u):
    u = _as_array(u)
    if np.any((u < 0) | (u > 1)) or not np.all(np.isfinite(u)):
        raise ValueError("original GAN needs discriminator outputs in [0, 1]")
    return np.clip(u, EPS_CLAMP, 1 - EPS_CLAMP)


def f_term(kind, u):
    kind = GanKind.parse(kind)
    if kind is GanKind.ORIGINAL:
        return np.log(_clamp_prob(u))
    u = _as_array(u)
    if kind is GanKind.LSGAN:
        return -0.5 * (u - 1.0) ** 2
    if kind is GanKind.WGAN:
        return u
    return -np.exp(1.0 - u)


def g_term(kind, u):
    kind = GanKind.parse(kind)
    if kind is GanKind.ORIGINAL:
        return np.log1p(-_clamp_prob(u))
    u = _as_array(u)
    if kind is GanKind.LSGAN:
        return -0.5 * u ** 2
    if kind is GanKind.WGAN:
        return -u
    return -np.exp(u)


def f_prime(kind, u):
    # derivatives are taken at the clamped point (straight-through clamp)
    kind = GanKind.parse(kind)
    if kind is GanKind.ORIGINAL:
        return 1.0 / _clamp_prob(u)
    u = _as_array(u)
    if kind is GanKind.LSGAN:
        return -(u - 1.0)
    if kind is GanKind.WGAN:
        return np.ones_like(u)
    return np.exp(1.0 - u)


def g_prime(kind, u):
    kind = GanKind.parse(kind)
    if kind is GanKind.ORIGINAL:
        return -1.0 / (1.0 - _clamp_prob(u))
    u = _as_array(u)
    if kind is GanKind.LSGAN:
        return -u
    if kind is GanKind.WGAN:
        return -np.ones_like(u)
    return -np.exp(u)


def _check_batches(role, d_real, d_fake):
    role = Role(role)
    d_fake = _as_array(d_fake).ravel()
    if d_fake.size == 0:
        raise ValueError("empty batch")
    if role is Role.DISCRIMINATOR:
        d_real = _as_array(d_real).ravel()
        if d_real.size == 0:
            raise ValueError("empty batch")
    return role, d_real, d_fake


def batch_loss(kind, role, d_real, d_fake) -> float:
    """Scalar loss that ``role`` minimises.

    ``d_real`` is ignored for the generator and may be ``None``.
    """
    kind = GanKind.parse(kind)
    role, d_real, d_fake = _check_batches(role, d_real, d_fake)
    if role is Role.GENERATOR:
        return float(np.mean(g_term(kind, d_fake)))
    return float(-(np.mean(f_term(kind, d_real)) + np.mean(g_term(kind, d_fake))))


def loss_grad(kind, role, d_real, d_fake):
    """Gradient of :func:`batch_loss` w.r.t. each discriminator output.

    Returns ``(grad_real, grad_fake)``; ``grad_real`` is ``None`` for the
    generator.
    """
    kind = GanKind.parse(kind)
    role, d_real, d_fake = _check_batches(role, d_real, d_fake)
    n_fake = d_fake.size
    if role is Role.GENERATOR:
        return None, g_prime(kind, d_fake) / n_fake
    n_real = d_real.size
    return -f_prime(kind, d_real) / n_real, -g_prime(kind, d_fake) / n_fake


def enforce_lipschitz(kind, net: Mlp, clip: float = 0.01) -> Mlp:
    """Clip every parameter of a WGAN critic into ``[-clip, clip]`` in place.

    Biases are clipped too, as in the original WGAN recipe.  The network is
    only marked modified when something actually moved.
    """
    if GanKind.parse(kind) is not GanKind.WGAN:
        raise ValueError("weight clipping applies to WGAN only")
    if clip <= 0:
        raise ValueError("clip must be positive")
    changed = False
    for layer in net.layers:
        if np.any(np.abs(layer.weight) > clip):
            layer.weight = np.clip(layer.weight, -clip, clip)
            changed = True
        if np.any(np.abs(layer.bias) > clip):
            layer.bias = np.clip(layer.bias, -clip, clip)
            changed = True
    if changed:
        net.touch()
    return net
