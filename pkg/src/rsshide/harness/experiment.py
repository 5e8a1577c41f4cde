"""Seeded Monte-Carlo confidence curves for the noisy-hiding setting.

Curves are generated in normalized units (person effect 1, emission mean 0):
the LLR between equal-scale location families depends only on sigma/delta.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .. import dist
from ..dist import Kind, NoiseDistribution
from ..errors import ConfigurationError, ProtocolError
from ..protocol import ProtocolConfig, ProtocolKind
from .csvio import fmt, write_rows
from .seeding import derive_seed

FAMILIES = {"laplace": Kind.LAPLACE, "normal": Kind.NORMAL}


@dataclass(frozen=True)
class ExperimentSpec:
    noise_family: str
    eta_values: Sequence[float]
    n_values: Sequence[int]
    trials: int = 10
    p_target: float = 0.05
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "eta_values", tuple(float(e) for e in self.eta_values))
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        if self.noise_family not in FAMILIES:
            raise ConfigurationError(f"noise family must be one of {sorted(FAMILIES)}")
        if not self.eta_values or any(not e > 0 or math.isinf(e) for e in self.eta_values):
            raise ConfigurationError("eta values must be a nonempty list of positive numbers")
        if not self.n_values or any(n < 1 for n in self.n_values):
            raise ConfigurationError("reading counts must be a nonempty list of positive integers")
        if self.trials < 1:
            raise ConfigurationError("trials must be at least 1")
        if not 0 < self.p_target < 0.5:
            raise ConfigurationError("p_target must lie in (0, 0.5)")


@dataclass(frozen=True)
class CurvePoint:
    eta: float
    n: int
    mean_confidence: float
    std_confidence: float
    mean_llr: float


def parse_range(text: str) -> List[int]:
    """``start:stop:step`` (inclusive of ``stop``) or a comma list."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            start, stop, step = parts
            if step < 1 or stop < start:
                raise ValueError
            return list(range(start, stop + 1, step))
        return [int(p) for p in text.split(",")]
    except ValueError:
        raise ConfigurationError(f"bad reading range {text!r}; expected start:stop:step") from None


def hypotheses(family: str, eta: float) -> tuple[NoiseDistribution, NoiseDistribution]:
    """(truth, alternative) in normalized units: the alternative sits one unit lower."""
    kind = FAMILIES[family]
    return NoiseDistribution(kind, 0.0, eta), NoiseDistribution(kind, -1.0, eta)


def trial_llr(spec: ExperimentSpec, eta_index: int, trial: int) -> np.ndarray:
    """Cumulative LLR of one trial, evaluated at each of ``spec.n_values``."""
    truth, alt = hypotheses(spec.noise_family, spec.eta_values[eta_index])
    rng = np.random.default_rng(derive_seed(spec.seed, eta_index, trial))
    x = dist.sample(truth, rng, max(spec.n_values))
    cum = np.cumsum(dist.log_likelihood_ratio(truth, alt, x))
    return cum[np.asarray(spec.n_values) - 1]


def llr_matrix(spec: ExperimentSpec, eta_index: int, workers: int = 1) -> np.ndarray:
    """``trials x len(n_values)`` cumulative LLRs, rows in trial order."""
    jobs = range(spec.trials)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(lambda t: trial_llr(spec, eta_index, t), jobs))
    else:
        rows = [trial_llr(spec, eta_index, t) for t in jobs]
    return np.vstack(rows)


def run_confidence_curve(spec: ExperimentSpec, workers: int = 1) -> List[CurvePoint]:
    points = []
    ddof = 1 if spec.trials > 1 else 0
    for i, eta in enumerate(spec.eta_values):
        llr = llr_matrix(spec, i, workers)
        conf = dist.confidence_from_llr(llr)
        mean_conf, std_conf = conf.mean(axis=0), conf.std(axis=0, ddof=ddof)
        mean_llr = llr.mean(axis=0)
        for j, n in enumerate(spec.n_values):
            points.append(CurvePoint(eta, n, float(mean_conf[j]), float(std_conf[j]), float(mean_llr[j])))
    return points


def curve_csv(points: Sequence[CurvePoint]) -> str:
    header = ["eta", "n", "mean_confidence", "std_confidence", "mean_llr"]
    rows = [[fmt(p.eta), fmt(p.n), fmt(p.mean_confidence), fmt(p.std_confidence), fmt(p.mean_llr)] for p in points]
    return write_rows(header, rows)


def first_crossing(points: Sequence[CurvePoint], eta: float, level: float, key: str = "mean_llr") -> int:
    """Smallest n at which ``confidence_from_llr(mean_llr)`` (or ``mean_confidence``) reaches ``level``.

    Returns -1 if the curve never gets there.
    """
    for pt in sorted((p for p in points if p.eta == eta), key=lambda p: p.n):
        value = dist.confidence_from_llr(pt.mean_llr) if key == "mean_llr" else getattr(pt, key)
        if value >= level:
            return pt.n
    return -1


def power_utilization(cfg: ProtocolConfig, m: float) -> float:
    """Expected emitted strength over ``m`` for a noise-injection sender."""
    if cfg.kind is not ProtocolKind.NOISE_INJECTION:
        raise ProtocolError("power utilization is defined for noise injection only")
    return cfg.emission_dist.mean() / m
