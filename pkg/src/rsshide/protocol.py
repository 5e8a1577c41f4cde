"""Sender-side hiding protocols and trace simulation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from . import dist
from .channel import CLAMP_TOLERANCE, Environment1D, Reading, clamp_probability, observe_many
from .dist import Kind, NoiseDistribution
from .errors import ConfigurationError, EmissionRangeError, ProtocolError

# Maximum tolerated probability that an untruncated emission leaves [0, M].
CEILING_TOLERANCE = 1e-6


class ProtocolKind(str, Enum):
    SHIFT = "shift"
    RANDOM_SHIFT = "random_shift"
    NOISE_INJECTION = "noise_injection"


@dataclass(frozen=True)
class ProtocolConfig:
    kind: ProtocolKind
    delta: float = 0.0
    shift_dist: Optional[NoiseDistribution] = None
    emission_dist: Optional[NoiseDistribution] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ProtocolKind(self.kind))
        if self.kind is ProtocolKind.SHIFT and not self.delta >= 0:
            raise ConfigurationError(f"shift delta must be nonnegative, got {self.delta}")
        if self.kind is ProtocolKind.RANDOM_SHIFT:
            if self.shift_dist is None:
                raise ConfigurationError("random shift needs a shift distribution")
            if self.shift_dist.support[0] < 0:
                raise ConfigurationError("shift distribution must have nonnegative support")
        if self.kind is ProtocolKind.NOISE_INJECTION and self.emission_dist is None:
            raise ConfigurationError("noise injection needs an emission distribution")

    @classmethod
    def shift(cls, delta: float) -> "ProtocolConfig":
        return cls(ProtocolKind.SHIFT, delta=delta)

    @classmethod
    def random_shift(cls, shift_dist: NoiseDistribution) -> "ProtocolConfig":
        return cls(ProtocolKind.RANDOM_SHIFT, shift_dist=shift_dist)

    @classmethod
    def noise_injection(cls, emission_dist: NoiseDistribution) -> "ProtocolConfig":
        return cls(ProtocolKind.NOISE_INJECTION, emission_dist=emission_dist)

    @property
    def knows_b(self) -> bool:
        return self.kind is not ProtocolKind.NOISE_INJECTION


def emission_outside_probability(d: NoiseDistribution, m: float) -> float:
    """P(draw from continuous ``d`` falls outside [0, m])."""
    return float(dist.cdf(d, 0.0)) + float(dist.sf(d, m))


def validate(cfg: ProtocolConfig, m: float) -> None:
    """Check the protocol against max strength ``m`` (the ceiling guard)."""
    if cfg.kind is ProtocolKind.SHIFT and cfg.delta > m:
        raise ConfigurationError(f"shift delta {cfg.delta} exceeds max strength {m}")
    if cfg.kind is ProtocolKind.RANDOM_SHIFT:
        lo, hi = cfg.shift_dist.support
        if hi > m:
            raise ConfigurationError(f"shift distribution support [{lo}, {hi}] leaves [0, {m}]")
    if cfg.kind is ProtocolKind.NOISE_INJECTION:
        d = cfg.emission_dist
        if d.kind in (Kind.TRUNCATED_NORMAL, Kind.POINT_MASS):
            lo, hi = d.support
            if lo < 0 or hi > m:
                raise ConfigurationError(f"emission support [{lo}, {hi}] leaves [0, {m}]")
        else:
            outside = emission_outside_probability(d, m)
            if outside >= CEILING_TOLERANCE:
                raise ConfigurationError(
                    f"untruncated {d.kind.value} emission leaves [0, {m}] with probability "
                    f"{outside:.3g}; use a truncated_normal emission"
                )


def emit(cfg: ProtocolConfig, m: float, b: Optional[int], rng: np.random.Generator) -> float:
    """Strength the sender emits for one time step.

    ``b`` must be given for protocols that know the interference bit and must
    be ``None`` for noise injection.
    """
    if cfg.knows_b and b is None:
        raise ProtocolError(f"{cfg.kind.value} needs the interference bit")
    if not cfg.knows_b and b is not None:
        raise ProtocolError("noise injection cannot see the interference bit")
    if cfg.kind is ProtocolKind.SHIFT:
        return m if b else m - cfg.delta
    if cfg.kind is ProtocolKind.RANDOM_SHIFT:
        return m if b else m - dist.sample(cfg.shift_dist, rng)
    alpha = dist.sample(cfg.emission_dist, rng)
    if not 0.0 <= alpha <= m:
        raise EmissionRangeError(f"emitted {alpha} outside [0, {m}]")
    return alpha


def _emit_many(cfg: ProtocolConfig, m: float, b: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n = b.shape[0]
    if cfg.kind is ProtocolKind.SHIFT:
        return np.where(b, m, m - cfg.delta)
    if cfg.kind is ProtocolKind.RANDOM_SHIFT:
        return np.where(b, m, m - dist.sample(cfg.shift_dist, rng, n))
    alpha = dist.sample(cfg.emission_dist, rng, n)
    if np.any((alpha < 0) | (alpha > m)):
        raise EmissionRangeError(f"emission left [0, {m}]; configuration violates the ceiling guard")
    return alpha


@dataclass(frozen=True)
class ObservationTrace:
    """Readings at the adversary plus the hidden ground truth, one row per step."""

    values: np.ndarray
    clamped: np.ndarray
    truth_b: np.ndarray
    emitted: np.ndarray
    max_strength: float

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, t: int) -> Reading:
        return Reading(float(self.values[t]), bool(self.clamped[t]), int(self.truth_b[t]))

    def __iter__(self):
        return (self[t] for t in range(len(self)))

    @property
    def power_utilization(self) -> float:
        """Mean emitted strength over M."""
        if len(self) == 0:
            return math.nan
        return float(self.emitted.mean() / self.max_strength)


def trace_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent generators for the sender's draws and the interference draws."""
    emit_seq, interf_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(emit_seq), np.random.default_rng(interf_seq)


def check_clamp_guard(cfg: ProtocolConfig, env: Environment1D) -> None:
    """Reject noise-injection setups where the zero floor would distort readings."""
    if cfg.kind is not ProtocolKind.NOISE_INJECTION:
        return
    for b in (0, 1):
        prob = clamp_probability(env, cfg.emission_dist, b)
        if prob >= CLAMP_TOLERANCE:
            raise ConfigurationError(
                f"readings clamp at zero with probability {prob:.3g} (b={b}); "
                "raise the emission mean or move the adversary closer"
            )


def run_trace(cfg: ProtocolConfig, env: Environment1D, b_sequence: Sequence[int], seed: int) -> ObservationTrace:
    """Run ``cfg`` against ``env`` for ``len(b_sequence)`` steps."""
    m = env.max_strength
    validate(cfg, m)
    check_clamp_guard(cfg, env)
    b = np.asarray(b_sequence, dtype=np.int8).reshape(-1)
    if np.any((b != 0) & (b != 1)):
        raise ConfigurationError("b_sequence must contain only 0 and 1")
    emit_rng, interf_rng = trace_streams(seed)
    alpha = _emit_many(cfg, m, b.astype(bool), emit_rng)
    values, clamped = observe_many(env, alpha, b, interf_rng)
    return ObservationTrace(values, clamped, b, alpha, m)

