"""Passive detectors and sample-complexity bounds for the adversary side."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, List

import numpy as np

from .dist import LlrState, NoiseDistribution, confidence_from_llr, llr_threshold, pair_log_likelihoods
from .channel import Environment1D
from .errors import ConfigurationError, ImpossibleObservationError, ParameterError, PerfectHidingError
from .protocol import ProtocolConfig, ProtocolKind


class Case(str, Enum):
    PERFECT_HIDING = "perfect_hiding"
    NOISY_HIDING = "noisy_hiding"
    IMMEDIATE_DETECTION = "immediate_detection"


class Decision(str, Enum):
    B0 = "b0"
    B1 = "b1"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class HypothesisPair:
    """Reading laws at the adversary: ``h0`` without a person, ``h1`` with one."""

    h0: NoiseDistribution
    h1: NoiseDistribution


@dataclass(frozen=True)
class DetectionReport:
    llr: LlrState
    confidence_b1: float
    decision: Decision
    case: Case


def reading_hypotheses(cfg: ProtocolConfig, env: Environment1D) -> HypothesisPair:
    """Exact laws of the adversary's (unclamped) readings under b=0 and b=1."""
    m, loss, interference = env.max_strength, env.path_loss, env.interference
    if cfg.kind is ProtocolKind.SHIFT:
        if not interference.is_discrete:
            raise ConfigurationError("the shift protocol assumes a constant person effect")
        return HypothesisPair(NoiseDistribution.point_mass((m - cfg.delta) - loss),
                              NoiseDistribution.point_mass((m - interference.mu) - loss))
    if cfg.kind is ProtocolKind.RANDOM_SHIFT:
        return HypothesisPair(cfg.shift_dist.negated().shifted(m - loss),
                              interference.negated().shifted(m - loss))
    if not interference.is_discrete:
        raise ConfigurationError("noise injection against a random person effect has no closed-form reading law")
    h0 = cfg.emission_dist.shifted(-loss)
    return HypothesisPair(h0, h0.shifted(-interference.mu))


def classify_case(pair: HypothesisPair) -> Case:
    h0, h1 = pair.h0, pair.h1
    if h0 == h1:
        return Case.PERFECT_HIDING
    if h0.is_discrete or h1.is_discrete or h0.support != h1.support:
        return Case.IMMEDIATE_DETECTION
    return Case.NOISY_HIDING


def sequential_detect(pair: HypothesisPair, readings: Iterable[float], p: float,
                      chunk: int = 4096) -> DetectionReport:
    """Accumulate the LLR of ``h1`` against ``h0`` until it leaves ±ln((1-p)/p).

    Positive LLR is evidence for b=1. The stopping rule is strict, so an LLR
    exactly on the boundary keeps reading. An identical pair stops at once.
    """
    bound = llr_threshold(p)
    if classify_case(pair) is Case.PERFECT_HIDING:
        return DetectionReport(LlrState(), 0.5, Decision.UNDECIDED, Case.PERFECT_HIDING)

    total, n = 0.0, 0
    decision = Decision.UNDECIDED
    it = iter(readings)
    while decision is Decision.UNDECIDED:
        block = np.fromiter(itertools.islice(it, chunk), dtype=float)
        if block.size == 0:
            break
        l1, l0 = pair_log_likelihoods(pair.h1, pair.h0, block)
        impossible = np.flatnonzero((l1 == -np.inf) & (l0 == -np.inf))
        usable = impossible[0] if impossible.size else block.size
        with np.errstate(invalid="ignore"):
            path = total + np.cumsum(l1[:usable] - l0[:usable])
        crossed = np.flatnonzero(np.abs(path) > bound)
        if crossed.size:
            stop = crossed[0]
            total, n = float(path[stop]), n + stop + 1
            decision = Decision.B1 if total > 0 else Decision.B0
        elif impossible.size:
            raise ImpossibleObservationError(
                f"reading {block[usable]} at index {n + usable} lies outside both supports")
        else:
            total, n = float(path[-1]), n + block.size

    immediate = math.isinf(total)
    case = Case.IMMEDIATE_DETECTION if immediate else Case.NOISY_HIDING
    state = LlrState(total, n, immediate)
    return DetectionReport(state, float(confidence_from_llr(total)), decision, case)


def moving_average_detect(readings: Iterable[float], window: int, threshold: float) -> List[Decision]:
    """Drop detector: B1 once the trailing ``window``-mean falls below ``threshold``.

    Outputs one decision per reading; a mean exactly at the threshold is B0.
    """
    return list(_moving_average(readings, window, threshold))


def _moving_average(readings, window, threshold) -> Iterator[Decision]:
    if window < 1:
        raise ParameterError("window must be at least 1")
    buf = np.zeros(window)
    for i, x in enumerate(readings):
        buf[i % window] = x
        if i + 1 < window:
            yield Decision.UNDECIDED
        else:
            # recompute each step: a running sum drifts and breaks exact ties
            yield Decision.B1 if math.fsum(buf) / window < threshold else Decision.B0


# --------------------------------------------------------------------------
# Sample-complexity bounds. Each returns the real-valued bound; an adversary
# needs strictly more readings than this (floor(bound) + 1 as an integer).


def n_required_laplace(p: float, eta: float) -> float:
    """Readings needed against Laplace noise with eta = sigma / delta."""
    if not eta > 0:
        raise ParameterError(f"eta must be positive, got {eta}")
    return llr_threshold(p) * eta


def _scale_penalty(ratio: float) -> float:
    # ln(r) + 1/(2 r^2) - 1/2 >= 0, zero only at r = 1
    if not ratio > 0:
        raise ParameterError(f"scale ratio must be positive, got {ratio}")
    return math.log(ratio) + 0.5 / (ratio * ratio) - 0.5


def n_required_normal(p: float, eta1: float, eta2: float) -> float:
    """Readings needed between two normals.

    ``eta1`` is sigma_alt / sigma_true and ``eta2`` is the mean gap over
    sigma_alt. With ``eta1 == 1`` this is 2 ln((1-p)/p) / eta2**2.
    """
    denom = 0.5 * eta2 * eta2 + _scale_penalty(eta1)
    if denom <= 0:
        raise PerfectHidingError("the two normals coincide")
    return llr_threshold(p) / denom


def n_required_normal_normal(p: float, eta: float, eta_prime: float) -> float:
    """Readings needed when both the emission and the person effect are normal.

    ``eta`` = sigma_1 / mu_I and ``eta_prime`` = sigma_1 / sigma with
    sigma_1 = sqrt(sigma**2 + sigma_I**2); see :func:`normal_normal_etas`.
    """
    if not eta > 0:
        raise ParameterError(f"eta must be positive, got {eta}")
    denom = 0.5 / (eta * eta) + _scale_penalty(eta_prime)
    if denom <= 0:
        raise PerfectHidingError("the emission and interfered laws coincide")
    return llr_threshold(p) / denom


def normal_normal_etas(sigma: float, sigma_i: float, mu_i: float) -> tuple[float, float]:
    """(eta, eta_prime) for emission std ``sigma`` and person effect Normal(mu_i, sigma_i)."""
    if not sigma > 0 or sigma_i < 0:
        raise ParameterError("need sigma > 0 and sigma_i >= 0")
    sigma_1 = math.hypot(sigma, sigma_i)
    eta = math.inf if mu_i == 0 else sigma_1 / abs(mu_i)
    return eta, sigma_1 / sigma


def min_readings(bound: float) -> int:
    """Smallest integer strictly above ``bound``."""
    return math.floor(bound) + 1
