"""One-dimensional propagation: linear decay, a zero floor and person interference."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import dist
from .dist import Kind, NoiseDistribution
from .errors import ConfigurationError, NumericError, ProtocolError

# Readings whose floor activates with at least this probability make the
# uncensored likelihood model invalid.
CLAMP_TOLERANCE = 1e-6


@dataclass(frozen=True)
class Environment1D:
    sender_pos: float
    adversary_pos: float
    decay_c: float
    max_strength: float
    interference: NoiseDistribution

    def __post_init__(self):
        if not self.decay_c > 0:
            raise ConfigurationError(f"decay rate must be positive, got {self.decay_c}")
        if not self.max_strength > 0:
            raise ConfigurationError(f"max strength must be positive, got {self.max_strength}")
        if self.interference.support[0] < 0:
            raise ConfigurationError("interference must have nonnegative support")

    @property
    def distance(self) -> float:
        return abs(self.sender_pos - self.adversary_pos)

    @property
    def path_loss(self) -> float:
        return self.decay_c * self.distance


@dataclass(frozen=True)
class Reading:
    value: float
    clamped: bool
    truth_b: int


def check_alpha(env: Environment1D, alpha) -> None:
    a = np.asarray(alpha, dtype=float)
    if np.any(~((a >= 0) & (a <= env.max_strength))):
        raise ProtocolError(f"emitted strength must lie in [0, {env.max_strength}]")


def attenuate(env: Environment1D, alpha, interference_effect):
    """Pre-clamp strength at the adversary.

    The interference term is subtracted before the path loss, so an emission
    of M - delta without a person and M with one round identically.
    """
    return (np.asarray(alpha, dtype=float) - interference_effect) - env.path_loss


def observe(env: Environment1D, alpha: float, b: int, rng: np.random.Generator) -> Reading:
    check_alpha(env, alpha)
    effect = dist.sample(env.interference, rng) if b else 0.0
    raw = float(attenuate(env, alpha, effect))
    return Reading(max(0.0, raw), raw < 0.0, int(b))


def observe_many(env: Environment1D, alpha, b, rng: np.random.Generator):
    """Vectorized :func:`observe`; returns ``(values, clamped)`` arrays.

    One interference draw is taken for every step regardless of ``b`` so that
    runs differing only in ``b`` share their random numbers.
    """
    alpha = np.asarray(alpha, dtype=float)
    b = np.asarray(b, dtype=bool)
    check_alpha(env, alpha)
    draws = dist.sample(env.interference, rng, alpha.shape[0])
    raw = attenuate(env, alpha, np.where(b, draws, 0.0))
    return np.maximum(raw, 0.0), raw < 0.0


def clamp_probability(env: Environment1D, emission: NoiseDistribution, b: int) -> float:
    """Probability that a reading hits the zero floor for emission law ``emission``."""
    loss = env.path_loss
    if not b or env.interference.is_discrete:
        cut = loss + (env.interference.mu if b else 0.0)
        return _prob_below(emission, cut)
    if emission.is_discrete:
        return float(dist.sf(env.interference, emission.mu - loss))

    # P(E < loss + I) = E_I[F_E(loss + I)] by conditioning on the interference.
    f = env.interference
    lo, hi = dist._integration_window(f)

    def integrand(y):
        return math.exp(dist.log_pdf(f, y)) * _prob_below(emission, loss + y)

    res = integrate.quad(integrand, lo, hi, points=[f.mu] if lo < f.mu < hi else None,
                         epsabs=1e-8, limit=200, full_output=1)
    if len(res) > 3:
        raise NumericError(f"clamp probability integration failed: {res[3]}")
    return min(max(res[0], 0.0), 1.0)


def _prob_below(d: NoiseDistribution, t: float) -> float:
    """P(X < t)."""
    if d.kind is Kind.POINT_MASS:
        return 1.0 if d.mu < t else 0.0
    return float(dist.cdf(d, t))
