"""Closed-form quantities for the four objectives on finite supports.

Everything here works on a pair of probability vectors ``(P, Pg)`` (real and
generated) and is exact up to float64 rounding, except
:func:`small_prob_proportion_approx`, which is the second-order expansion in
the perturbation size.  Events with ``P = Pg = 0`` contribute nothing to any
sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .objectives import GanKind

__all__ = [
    "UnsupportedKindError",
    "DiscretePair",
    "PerturbedBernoulli",
    "EventPartition",
    "random_pair",
    "optimal_discriminator",
    "golden_section_min",
    "pointwise_min_check",
    "objective_at_opt_mim",
    "mim_objective",
    "renyi_divergence",
    "renyi_equivalence_check",
    "generator_objective_at_dopt",
    "mode_drop_penalty",
    "gradient_interference",
    "gradient_interference_empirical",
    "small_prob_proportion_exact",
    "small_prob_proportion_approx",
    "large_prob_proportion_mim",
]

SQRT_E = math.sqrt(math.e)


class UnsupportedKindError(ValueError):
    """The requested GAN kind has no closed form for this quantity."""


@dataclass(frozen=True)
class DiscretePair:
    p: np.ndarray
    pg: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64)
        pg = np.asarray(self.pg, dtype=np.float64)
        if p.ndim != 1 or p.shape != pg.shape:
            raise ValueError("P and Pg must be 1-d vectors of equal length")
        for name, v in (("P", p), ("Pg", pg)):
            if np.any(v < 0) or not np.all(np.isfinite(v)):
                raise ValueError(f"{name} has negative or non-finite entries")
            if abs(v.sum() - 1.0) > 1e-12:
                raise ValueError(f"{name} sums to {v.sum()!r}, not 1")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "pg", pg)

    @property
    def n(self) -> int:
        return self.p.size

    @classmethod
    def bernoulli(cls, p: float, q: float) -> "DiscretePair":
        return cls(np.array([p, 1.0 - p]), np.array([q, 1.0 - q]))


@dataclass(frozen=True)
class PerturbedBernoulli:
    """Real ``{p, 1-p}`` against generated ``{q, 1-q}``, ``q = p + eps p^gamma rho``."""
    p: float
    epsilon: float
    gamma: float = 1.0
    rho_p: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.p < 0.5:
            raise ValueError("p must lie in (0, 0.5)")
        if not 0.0 < self.q < 0.5:
            raise ValueError(f"perturbed q = {self.q!r} must lie in (0, 0.5)")

    @property
    def shift(self) -> float:
        return self.epsilon * self.p ** self.gamma * self.rho_p

    @property
    def q(self) -> float:
        return self.p + self.shift

    @classmethod
    def from_shift(cls, p: float, d: float) -> "PerturbedBernoulli":
        # gamma = rho = 1 and eps = d / p gives q = p + d
        return cls(p, d / p, 1.0, 1.0)

    def pair(self) -> DiscretePair:
        return DiscretePair.bernoulli(self.p, self.q)


@dataclass(frozen=True)
class EventPartition:
    small: np.ndarray  # boolean mask over the support

    @classmethod
    def from_indices(cls, n: int, small: Iterable[int]) -> "EventPartition":
        mask = np.zeros(n, dtype=bool)
        mask[list(small)] = True
        return cls(mask)

    @property
    def large(self) -> np.ndarray:
        return ~self.small


def random_pair(rng: np.random.Generator, n: int, *, positive: bool = True) -> DiscretePair:
    """Two Dirichlet(1) draws, optionally floored away from zero."""
    p = rng.dirichlet(np.ones(n))
    pg = rng.dirichlet(np.ones(n))
    if positive:
        p = (p + 1e-6) / (p + 1e-6).sum()
        pg = (pg + 1e-6) / (pg + 1e-6).sum()
    return DiscretePair(p, pg)


def _theory_kind(kind) -> GanKind:
    kind = GanKind.parse(kind)
    if kind is GanKind.WGAN:
        raise UnsupportedKindError(
            "the WGAN optimal critic depends only on sign(P - Pg); no closed form")
    return kind


def optimal_discriminator(kind, pair: DiscretePair) -> np.ndarray:
    kind = _theory_kind(kind)
    p, pg = pair.p, pair.pg
    if kind is GanKind.MIM:
        if np.any(p == 0) or np.any(pg == 0):
            raise ValueError("MIM optimal discriminator needs P, Pg > 0 on every event")
        return 0.5 + 0.5 * np.log(p / pg)
    s = p + pg
    if np.any(s == 0):
        raise ValueError("P + Pg vanishes on some event")
    return p / s


def golden_section_min(a: float, b: float, lo: float = -20.0, hi: float = 20.0,
                       tol: float = 1e-13) -> float:
    """Minimise ``F(u) = a exp(1-u) + b exp(u)`` by golden-section search.

    Comparisons use ``F(u1) - F(u2)`` written with ``expm1`` so they stay
    exact near the flat minimum, where naive evaluation of ``F`` cannot
    separate points closer than about 1e-8.
    """
    invphi = (math.sqrt(5.0) - 1.0) / 2.0

    def less(u1, u2):
        # sign of F(u1) - F(u2)
        diff = (a * math.exp(1.0 - u2) * math.expm1(u2 - u1)
                + b * math.exp(u2) * math.expm1(u1 - u2))
        return diff < 0

    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    while hi - lo > tol:
        if less(x1, x2):
            hi, x2 = x2, x1
            x1 = hi - invphi * (hi - lo)
        else:
            lo, x1 = x1, x2
            x2 = lo + invphi * (hi - lo)
    return 0.5 * (lo + hi)


def pointwise_min_check(a: float, b: float) -> tuple[float, float]:
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    return golden_section_min(a, b), 0.5 + 0.5 * math.log(a / b)


def mim_objective(pair: DiscretePair, d: np.ndarray) -> float:
    """``sum P exp(1 - D) + Pg exp(D)`` for an arbitrary per-event D."""
    return float(np.sum(pair.p * np.exp(1.0 - d) + pair.pg * np.exp(d)))


def objective_at_opt_mim(pair: DiscretePair) -> float:
    return 2.0 * SQRT_E * float(np.sum(np.sqrt(pair.p * pair.pg)))


def renyi_divergence(p: np.ndarray, q: np.ndarray, alpha: float) -> float:
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if alpha <= 0 or alpha == 1:
        raise ValueError("alpha must be positive and different from 1")
    return float(np.log(np.sum(p * (p / q) ** (alpha - 1.0))) / (alpha - 1.0))


def renyi_equivalence_check(pair: DiscretePair) -> tuple[float, float]:
    """Optimal MIM objective vs its order-1/2 Renyi form; both sides direct."""
    if np.any(pair.p == 0) or np.any(pair.pg == 0):
        raise ValueError("Renyi form needs strictly positive P and Pg")
    lhs = SQRT_E * float(np.sum(pair.p * np.sqrt(pair.pg / pair.p)
                                + pair.pg * np.sqrt(pair.p / pair.pg)))
    r_fwd = renyi_divergence(pair.p, pair.pg, 0.5)
    r_bwd = renyi_divergence(pair.pg, pair.p, 0.5)
    rhs = SQRT_E * (math.exp(-0.5 * r_fwd) + math.exp(-0.5 * r_bwd))
    return lhs, rhs


def _per_event_generator_objective(kind: GanKind, p, pg):
    p = np.asarray(p, dtype=np.float64)
    pg = np.asarray(pg, dtype=np.float64)
    if kind is GanKind.MIM:
        return np.sqrt(p * pg)
    if kind is GanKind.LSGAN:
        s = p + pg
        out = np.zeros(np.broadcast(p, pg).shape)
        nz = np.broadcast_to(s > 0, out.shape)
        pb, pgb, sb = (np.broadcast_to(v, out.shape) for v in (p, pg, s))
        out[nz] = pb[nz] * pb[nz] * pgb[nz] / sb[nz] ** 2
        return out
    # original GAN: -Pg ln(Pg / P); 0 where Pg = 0, -inf where only P = 0
    pb, pgb = np.broadcast_arrays(p, pg)
    out = np.zeros(pb.shape)
    live = pgb > 0
    with np.errstate(divide="ignore"):
        out[live] = -pgb[live] * np.log(pgb[live] / pb[live])
    return out


def generator_objective_at_dopt(kind, pair: DiscretePair) -> float:
    """Generator objective (to maximise) once D sits at its optimum.

    MIM gives the Bhattacharyya coefficient, the original GAN ``-KL(Pg || P)``
    (``-inf`` when Pg puts mass where P has none), LSGAN
    ``sum P * P Pg / (P + Pg)^2``.
    """
    kind = _theory_kind(kind)
    return float(np.sum(_per_event_generator_objective(kind, pair.p, pair.pg)))


def mode_drop_penalty(kind, p_event: float, pg_grid=None) -> tuple[np.ndarray, np.ndarray]:
    """Per-event generator-objective contribution as ``Pg(x) -> 0``.

    Returns ``(pg_grid, contribution)`` with the grid in decreasing order
    (``1e-1 ... 1e-8`` by default).
    """
    kind = _theory_kind(kind)
    if p_event <= 0:
        raise ValueError("p_event must be positive")
    if pg_grid is None:
        pg_grid = 10.0 ** -np.arange(1, 9)
    pg_grid = np.asarray(pg_grid, dtype=np.float64)
    return pg_grid, _per_event_generator_objective(kind, p_event, pg_grid)


def gradient_interference(kind, delta: float, upsilon: float, e_grad: float) -> float:
    """Magnitude of the generator-gradient shift caused by an imperfect critic.

    ``delta`` is the offset of D from the perfect critic on generated samples,
    ``upsilon`` the offset of its input gradient, ``e_grad`` the mean
    generator Jacobian.
    """
    kind = GanKind.parse(kind)
    if not 0.0 <= delta < 1.0:
        raise ValueError("delta must lie in [0, 1)")
    if kind is GanKind.MIM:
        return math.exp(delta) * upsilon * e_grad
    if kind is GanKind.ORIGINAL:
        return upsilon / (1.0 - delta) * e_grad
    return upsilon * e_grad


# generator-side term whose theta-gradient is compared, per kind
_GEN_TERMS = {
    GanKind.MIM: (np.exp, lambda d, u, e: math.exp(d) * u * e),
    GanKind.ORIGINAL: (lambda u: np.log1p(-u), lambda d, u, e: -u / (1.0 - d) * e),
    GanKind.WGAN: (lambda u: u, lambda d, u, e: u * e),
}


def gradient_interference_empirical(kind, seed: int, delta: float = 0.05,
                                    upsilon: float = 0.02, n_samples: int = 512,
                                    h: float = 1e-6) -> tuple[float, float]:
    """Finite-difference check of the gradient-shift closed form.

    Uses a scalar linear generator ``g(z) = theta z`` at ``theta = 0`` and the
    critic ``D(x) = delta + upsilon x`` against the perfect critic ``D = 0``,
    so that ``D(g(z)) = delta`` exactly at the evaluation point.  Returns the
    signed ``(analytic, measured)`` gradient differences.

    LSGAN is rejected: its generator term ``D^2 / 2`` gives a shift of
    ``delta * upsilon``, not the ``upsilon`` stated for it.
    """
    kind = GanKind.parse(kind)
    if kind not in _GEN_TERMS:
        raise UnsupportedKindError(f"no empirical gradient check for {kind.value}")
    rng = np.random.default_rng(seed)
    z = rng.uniform(0.5, 1.5, size=n_samples)
    term, closed = _GEN_TERMS[kind]

    def expect(theta, d0, ups):
        return float(np.mean(term(d0 + ups * theta * z)))

    def fd(d0, ups):
        return (expect(h, d0, ups) - expect(-h, d0, ups)) / (2.0 * h)

    measured = fd(delta, upsilon) - fd(0.0, 0.0)
    analytic = closed(delta, upsilon, float(np.mean(z)))
    return analytic, measured


def _proportion_terms(kind: GanKind, pair: DiscretePair) -> np.ndarray:
    p, pg = pair.p, pair.pg
    if kind is GanKind.MIM:
        return np.sqrt(p * pg)
    s = p + pg
    live = s > 0
    out = np.zeros_like(p)
    if kind is GanKind.ORIGINAL:
        pl, gl, sl = p[live], pg[live], s[live]
        with np.errstate(divide="ignore", invalid="ignore"):
            a = np.where(pl > 0, pl * np.log(pl / sl), 0.0)
            b = np.where(gl > 0, gl * np.log(gl / sl), 0.0)
        out[live] = a + b
        return out
    d = p[live] / s[live]
    out[live] = 0.5 * p[live] * (d - 1.0) ** 2 + 0.5 * pg[live] * d * d
    return out


def small_prob_proportion_exact(kind, pair: DiscretePair, partition: EventPartition) -> float:
    """Share of the optimal-critic objective carried by the small-event set."""
    kind = _theory_kind(kind)
    terms = _proportion_terms(kind, pair)
    return float(np.sum(terms[partition.small]) / np.sum(terms))


_APPROX_COEF = {
    GanKind.MIM: 1.0 / 8.0,
    GanKind.ORIGINAL: 1.0 / (8.0 * math.log(2.0)),
    GanKind.LSGAN: 1.0 / 4.0,
}


def small_prob_proportion_approx(kind, bern: PerturbedBernoulli) -> float:
    """Second-order small-event share for the perturbed Bernoulli pair."""
    kind = _theory_kind(kind)
    c = _APPROX_COEF[kind]
    p, q = bern.p, bern.q
    curv = bern.epsilon ** 2 * p ** (2 * bern.gamma - 1) * bern.rho_p ** 2
    return ((p + q) / 2.0 - c * curv) / (1.0 - c * curv / (1.0 - p))


def large_prob_proportion_mim(pair: DiscretePair, partition: EventPartition) -> float:
    terms = np.sqrt(pair.p * pair.pg)
    return float(np.sum(terms[partition.large]) / np.sum(terms))
