"""Noise distributions, KL divergences and log-likelihood ratio bookkeeping.

Every density here is fully normalized, so log-likelihood ratios between
families with different scales (or between a truncated and an untruncated
law) are exact rather than correct only up to a constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Union

import numpy as np
from scipy import integrate, special

from .errors import ImpossibleObservationError, NumericError, ParameterError

ArrayLike = Union[float, np.ndarray]

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class Kind(str, Enum):
    LAPLACE = "laplace"
    NORMAL = "normal"
    TRUNCATED_NORMAL = "truncated_normal"
    POINT_MASS = "point_mass"


@dataclass(frozen=True)
class NoiseDistribution:
    """A location-scale noise law.

    ``sigma`` is the Laplace scale or the Normal standard deviation (of the
    parent Normal, for the truncated kind). ``lo``/``hi`` are only meaningful
    for ``TRUNCATED_NORMAL``.
    """

    kind: Kind
    mu: float
    sigma: float = 0.0
    lo: float = -math.inf
    hi: float = math.inf

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        for name in ("mu", "sigma", "lo", "hi"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if math.isnan(self.mu) or math.isinf(self.mu):
            raise ParameterError(f"location must be finite, got {self.mu}")
        if self.kind is Kind.POINT_MASS:
            if self.sigma != 0.0:
                raise ParameterError("point mass requires sigma == 0")
        elif not self.sigma > 0.0 or math.isinf(self.sigma):
            raise ParameterError(f"{self.kind.value} requires 0 < sigma < inf, got {self.sigma}")
        if self.kind is Kind.TRUNCATED_NORMAL:
            if not self.lo < self.hi:
                raise ParameterError(f"truncation bounds need lo < hi, got [{self.lo}, {self.hi}]")
            if self._log_mass() == -math.inf:
                raise ParameterError("truncation interval carries no probability mass")
        elif (self.lo, self.hi) != (-math.inf, math.inf):
            raise ParameterError("only truncated_normal accepts bounds")

    @classmethod
    def laplace(cls, mu: float, sigma: float) -> "NoiseDistribution":
        return cls(Kind.LAPLACE, mu, sigma)

    @classmethod
    def normal(cls, mu: float, sigma: float) -> "NoiseDistribution":
        return cls(Kind.NORMAL, mu, sigma)

    @classmethod
    def truncated_normal(cls, mu: float, sigma: float, lo: float, hi: float) -> "NoiseDistribution":
        return cls(Kind.TRUNCATED_NORMAL, mu, sigma, lo, hi)

    @classmethod
    def point_mass(cls, mu: float) -> "NoiseDistribution":
        return cls(Kind.POINT_MASS, mu)

    @property
    def is_discrete(self) -> bool:
        return self.kind is Kind.POINT_MASS

    @property
    def support(self) -> tuple[float, float]:
        """Closed interval containing all the probability mass."""
        if self.kind is Kind.POINT_MASS:
            return (self.mu, self.mu)
        return (self.lo, self.hi)

    def shifted(self, offset: float) -> "NoiseDistribution":
        """The law of ``X + offset``."""
        return replace(self, mu=self.mu + offset, lo=self.lo + offset, hi=self.hi + offset)

    def negated(self) -> "NoiseDistribution":
        """The law of ``-X``."""
        return replace(self, mu=-self.mu, lo=-self.hi, hi=-self.lo)

    def mean(self) -> float:
        if self.kind is not Kind.TRUNCATED_NORMAL:
            return self.mu
        a, b = self._std_bounds()
        log_z = self._log_mass()
        # E[Z | a <= Z <= b] = (phi(a) - phi(b)) / (Phi(b) - Phi(a))
        return self.mu + self.sigma * (_phi(a) - _phi(b)) / math.exp(log_z)

    def _std_bounds(self) -> tuple[float, float]:
        return (self.lo - self.mu) / self.sigma, (self.hi - self.mu) / self.sigma

    def _log_mass(self) -> float:
        a, b = self._std_bounds()
        return _log_normal_mass(a, b)


def _phi(z: float) -> float:
    if math.isinf(z):
        return 0.0
    return math.exp(-0.5 * z * z - _LOG_SQRT_2PI)


def _log_normal_mass(a: float, b: float) -> float:
    """log(Phi(b) - Phi(a)) without cancellation in either tail."""
    if a > 0:
        a, b = -b, -a
    log_b = special.log_ndtr(b)
    log_a = special.log_ndtr(a)
    if log_a == -math.inf:
        return float(log_b)
    diff = log_a - log_b
    if diff >= 0:
        return -math.inf
    return float(log_b + math.log(-math.expm1(diff)))


_log_mass_vec = np.vectorize(_log_normal_mass, otypes=[float])


def _as_output(x, out):
    if np.ndim(x) == 0:
        return float(out)
    return out


def log_pdf(d: NoiseDistribution, x: ArrayLike) -> ArrayLike:
    """Natural log of the density (probability, for a point mass) at ``x``.

    Returns ``-inf`` outside the support. Accepts scalars or arrays.
    """
    xa = np.asarray(x, dtype=float)
    if d.kind is Kind.LAPLACE:
        out = -math.log(2.0 * d.sigma) - np.abs(xa - d.mu) / d.sigma
    elif d.kind is Kind.NORMAL:
        z = (xa - d.mu) / d.sigma
        out = -_LOG_SQRT_2PI - math.log(d.sigma) - 0.5 * z * z
    elif d.kind is Kind.TRUNCATED_NORMAL:
        z = (xa - d.mu) / d.sigma
        out = -_LOG_SQRT_2PI - math.log(d.sigma) - 0.5 * z * z - d._log_mass()
        out = np.where((xa >= d.lo) & (xa <= d.hi), out, -np.inf)
    else:
        out = np.where(xa == d.mu, 0.0, -np.inf)
    return _as_output(x, out)


def cdf(d: NoiseDistribution, x: ArrayLike) -> ArrayLike:
    """P(X <= x)."""
    xa = np.asarray(x, dtype=float)
    if d.kind is Kind.LAPLACE:
        z = (xa - d.mu) / d.sigma
        out = np.where(z < 0, 0.5 * np.exp(np.minimum(z, 0.0)), 1.0 - 0.5 * np.exp(-np.maximum(z, 0.0)))
    elif d.kind is Kind.NORMAL:
        out = special.ndtr((xa - d.mu) / d.sigma)
    elif d.kind is Kind.TRUNCATED_NORMAL:
        a, _ = d._std_bounds()
        z = (np.clip(xa, d.lo, d.hi) - d.mu) / d.sigma
        mass = _log_mass_vec(a, z)
        out = np.clip(np.exp(mass - d._log_mass()), 0.0, 1.0)
    else:
        out = np.where(xa >= d.mu, 1.0, 0.0)
    return _as_output(x, out)


def sf(d: NoiseDistribution, x: ArrayLike) -> ArrayLike:
    """P(X > x), accurate in the upper tail."""
    xa = np.asarray(x, dtype=float)
    if d.kind is Kind.LAPLACE:
        z = (xa - d.mu) / d.sigma
        out = np.where(z > 0, 0.5 * np.exp(-np.maximum(z, 0.0)), 1.0 - 0.5 * np.exp(np.minimum(z, 0.0)))
    elif d.kind is Kind.NORMAL:
        out = special.ndtr(-(xa - d.mu) / d.sigma)
    elif d.kind is Kind.TRUNCATED_NORMAL:
        _, b = d._std_bounds()
        z = (np.clip(xa, d.lo, d.hi) - d.mu) / d.sigma
        mass = _log_mass_vec(z, b)
        out = np.clip(np.exp(mass - d._log_mass()), 0.0, 1.0)
    else:
        out = np.where(xa < d.mu, 1.0, 0.0)
    return _as_output(x, out)


def sample(d: NoiseDistribution, rng: np.random.Generator, size: Optional[int] = None) -> ArrayLike:
    """Draw from ``d``; the truncated kind uses exact inverse-CDF sampling."""
    if d.kind is Kind.POINT_MASS:
        return d.mu if size is None else np.full(size, d.mu)
    if d.kind is Kind.LAPLACE:
        out = rng.laplace(d.mu, d.sigma, size)
    elif d.kind is Kind.NORMAL:
        out = rng.normal(d.mu, d.sigma, size)
    else:
        out = d.mu + d.sigma * _truncated_std_ppf(*d._std_bounds(), rng.random(size))
        out = np.clip(out, d.lo, d.hi)
    return float(out) if size is None else out


def _truncated_std_ppf(a: float, b: float, u: ArrayLike) -> ArrayLike:
    # Mirror upper-tail intervals so Phi is evaluated where it has full precision.
    if a > 0:
        return -_truncated_std_ppf(-b, -a, 1.0 - np.asarray(u))
    pa, pb = special.ndtr(a), special.ndtr(b)
    return special.ndtri(pa + np.asarray(u) * (pb - pa))


# --------------------------------------------------------------------------
# KL divergence


def kl_divergence(p: NoiseDistribution, q: NoiseDistribution) -> float:
    """KL(p || q) in nats.

    Closed forms for Normal/Normal and Laplace/Laplace; adaptive quadrature
    for every other pair. A support violation (mass of ``p`` where ``q`` has
    none) returns ``inf``, the immediate-detection case.
    """
    if p == q:
        return 0.0
    if p.is_discrete or q.is_discrete:
        # distinct atoms, or an atom against a density: mutually singular
        return math.inf
    if p.lo < q.lo or p.hi > q.hi:
        return math.inf
    if p.kind is Kind.NORMAL and q.kind is Kind.NORMAL:
        return _kl_normal(p.mu, p.sigma, q.mu, q.sigma)
    if p.kind is Kind.LAPLACE and q.kind is Kind.LAPLACE:
        return _kl_laplace(p.mu, p.sigma, q.mu, q.sigma)
    return kl_numerical(p, q)


def _kl_normal(mu1, s1, mu2, s2) -> float:
    return ((mu1 - mu2) ** 2 + s1 * s1 - s2 * s2) / (2.0 * s2 * s2) + math.log(s2 / s1)


def _kl_laplace(mu1, b1, mu2, b2) -> float:
    gap = abs(mu1 - mu2)
    return math.log(b2 / b1) + gap / b2 + (b1 / b2) * math.exp(-gap / b1) - 1.0


def _integration_window(p: NoiseDistribution) -> tuple[float, float]:
    width = 60.0 * p.sigma if p.kind is Kind.LAPLACE else 40.0 * p.sigma
    return max(p.lo, p.mu - width), min(p.hi, p.mu + width)


def kl_numerical(p: NoiseDistribution, q: NoiseDistribution, rtol: float = 1e-8) -> float:
    """KL(p || q) by adaptive quadrature of p*log(p/q) over the support of p."""
    if p.is_discrete or q.is_discrete:
        raise ParameterError("numerical KL needs two continuous distributions")
    lo, hi = _integration_window(p)
    breaks = sorted({v for v in (p.mu, q.mu, q.lo, q.hi) if lo < v < hi})

    def integrand(x):
        lp = log_pdf(p, x)
        if lp == -math.inf:
            return 0.0
        return math.exp(lp) * (lp - log_pdf(q, x))

    total = 0.0
    edges = [lo, *breaks, hi]
    for left, right in zip(edges[:-1], edges[1:]):
        res = integrate.quad(integrand, left, right, epsabs=1e-14, epsrel=rtol, limit=500, full_output=1)
        if len(res) > 3:
            raise NumericError(f"KL integration did not converge on [{left}, {right}]: {res[3]}")
        total += res[0]
    return max(total, 0.0)


# --------------------------------------------------------------------------
# Log-likelihood ratios


@dataclass(frozen=True)
class LlrState:
    """Running log-likelihood ratio over ``n`` readings.

    ``immediate`` is set once a reading was impossible under exactly one
    hypothesis; ``cum_llr`` is then saturated at +inf or -inf.
    """

    cum_llr: float = 0.0
    n: int = 0
    immediate: bool = False

    def __post_init__(self):
        if self.n < 0:
            raise ParameterError("reading count must be nonnegative")
        if self.n == 0 and self.cum_llr != 0.0:
            raise ParameterError("an empty state must have zero LLR")
        if math.isinf(self.cum_llr) != self.immediate:
            raise ParameterError("infinite LLR and the immediate flag must agree")


def pair_log_likelihoods(a: NoiseDistribution, b: NoiseDistribution, x: ArrayLike):
    """Log-likelihoods of ``x`` under ``a`` and ``b`` w.r.t. a common measure.

    When exactly one of the laws is a point mass, the continuous law assigns
    zero likelihood to the atom and the atom assigns zero likelihood to every
    other point.
    """
    la, lb = log_pdf(a, x), log_pdf(b, x)
    if a.is_discrete != b.is_discrete:
        atom = a.mu if a.is_discrete else b.mu
        on_atom = np.asarray(x) == atom
        if a.is_discrete:
            lb = np.where(on_atom, -np.inf, lb)
        else:
            la = np.where(on_atom, -np.inf, la)
        la, lb = _as_output(x, la), _as_output(x, lb)
    return la, lb


def log_likelihood_ratio(p_true: NoiseDistribution, p_alt: NoiseDistribution, x: ArrayLike) -> ArrayLike:
    """Per-reading ln(L(x | p_true) / L(x | p_alt)); +-inf on support violations."""
    if p_true.kind is Kind.LAPLACE and p_alt.kind is Kind.LAPLACE and p_true.sigma == p_alt.sigma:
        # difference form: far readings would otherwise cancel two huge log-densities
        xa = np.asarray(x, dtype=float)
        cap = abs(p_true.mu - p_alt.mu) / p_true.sigma
        out = np.clip((np.abs(xa - p_alt.mu) - np.abs(xa - p_true.mu)) / p_true.sigma, -cap, cap)
        return _as_output(x, out)
    lt, la = pair_log_likelihoods(p_true, p_alt, x)
    lt_a, la_a = np.asarray(lt), np.asarray(la)
    both = (lt_a == -np.inf) & (la_a == -np.inf)
    if np.any(both):
        bad = np.asarray(x, dtype=float)[both] if np.ndim(x) else x
        raise ImpossibleObservationError(f"reading(s) {bad} lie outside both supports")
    with np.errstate(invalid="ignore"):
        out = lt_a - la_a
    return _as_output(x, out)


def llr_update(state: LlrState, x: float, p_true: NoiseDistribution, p_alt: NoiseDistribution) -> LlrState:
    step = log_likelihood_ratio(p_true, p_alt, x)
    if state.immediate:
        if math.isinf(step) and (step > 0) != (state.cum_llr > 0):
            raise ImpossibleObservationError("readings are impossible under each hypothesis in turn")
        return LlrState(state.cum_llr, state.n + 1, True)
    total = state.cum_llr + step
    return LlrState(total, state.n + 1, math.isinf(total))


def confidence_from_llr(m: ArrayLike) -> ArrayLike:
    """Logistic map e^m / (1 + e^m), exactly antisymmetric about m = 0."""
    ma = np.asarray(m, dtype=float)
    upper = 1.0 / (1.0 + np.exp(-np.abs(ma)))
    out = np.where(ma >= 0, upper, 1.0 - upper)
    return _as_output(m, out)


def llr_threshold(p: float) -> float:
    """ln((1 - p) / p): the LLR needed for 1 - p confidence."""
    if not 0.0 < p < 0.5:
        raise ParameterError(f"p must lie in (0, 0.5), got {p}")
    return math.log1p(-p) - math.log(p)
