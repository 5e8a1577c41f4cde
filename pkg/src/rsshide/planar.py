"""Directional emission in the plane: narrow-band beams and gradual angular decay.

Adversaries are identified by their bearing from the sender. Radial path loss
is fixed per adversary and taken to be folded into the base strength, so only
the angular offset from the beam direction matters here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import GeometryError, ParameterError

TWO_PI = 2.0 * math.pi


def wrap_angle(a):
    """Map an angle (or array) into [0, 2*pi)."""
    out = np.mod(a, TWO_PI)
    # mod can round up to exactly 2*pi for tiny negative inputs
    out = np.where(out >= TWO_PI, 0.0, out)
    return float(out) if np.ndim(a) == 0 else out


def signed_offset(frm: float, to: float) -> float:
    """Shortest signed rotation taking bearing ``frm`` to bearing ``to``, in (-pi, pi]."""
    d = math.remainder(to - frm, TWO_PI)
    return math.pi if d == -math.pi else d


def angular_distance(a, b):
    """Wrapped distance between bearings, in [0, pi]."""
    d = np.mod(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)), TWO_PI)
    d = np.minimum(d, TWO_PI - d)
    return float(d) if np.ndim(d) == 0 else d


@dataclass(frozen=True)
class Scene2D:
    adversary_angles: Sequence[float]
    base_strength: float
    max_strength: float
    tau: float = 0.1
    decay_slope: float = 1.0
    interference_delta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "adversary_angles", tuple(wrap_angle(float(a)) for a in self.adversary_angles))
        if not 0 < self.tau < math.pi:
            raise ParameterError(f"tau must lie in (0, pi), got {self.tau}")
        if not self.decay_slope > 0:
            raise ParameterError(f"decay slope must be positive, got {self.decay_slope}")
        if not 0 < self.base_strength <= self.max_strength:
            raise ParameterError("need 0 < base strength <= max strength")
        if self.interference_delta < 0:
            raise ParameterError("interference delta must be nonnegative")
        angles = self.adversary_angles
        for i in range(len(angles)):
            for j in range(i + 1, len(angles)):
                if angular_distance(angles[i], angles[j]) == 0:
                    raise GeometryError(f"adversaries {i} and {j} share a bearing")


def narrowband_visible(adversary_angle, theta, tau: float):
    """Whether a beam aimed at ``theta`` is seen at ``adversary_angle`` (open window)."""
    return angular_distance(adversary_angle, theta) < tau


def check_narrowband(scene: Scene2D) -> None:
    angles = scene.adversary_angles
    for i in range(len(angles)):
        for j in range(i + 1, len(angles)):
            sep = angular_distance(angles[i], angles[j])
            if sep <= 2 * scene.tau:
                raise GeometryError(
                    f"adversaries {i} and {j} are {sep:.6g} rad apart; "
                    f"narrow-band hiding needs more than 2*tau = {2 * scene.tau:.6g}"
                )


def narrowband_round(scene: Scene2D, rng: np.random.Generator) -> tuple[float, frozenset]:
    """Aim the beam uniformly at random; return the bearing and who saw it."""
    check_narrowband(scene)
    theta = float(rng.uniform(0.0, TWO_PI))
    seen = frozenset(i for i, a in enumerate(scene.adversary_angles) if narrowband_visible(a, theta, scene.tau))
    return theta, seen


def narrowband_rounds(scene: Scene2D, rng: np.random.Generator, rounds: int):
    """Vectorized rounds: ``(thetas, visible)`` with ``visible[r, i]`` per adversary."""
    check_narrowband(scene)
    thetas = rng.uniform(0.0, TWO_PI, rounds)
    angles = np.asarray(scene.adversary_angles)
    visible = narrowband_visible(angles[None, :], thetas[:, None], scene.tau)
    return thetas, visible


def gradual_reading(scene: Scene2D, theta: float, alpha: float, adversary_index: int, interfered: bool) -> float:
    if not 0 <= alpha <= scene.max_strength:
        raise ParameterError(f"alpha must lie in [0, {scene.max_strength}], got {alpha}")
    offset = angular_distance(scene.adversary_angles[adversary_index], theta)
    drop = scene.interference_delta if interfered else 0.0
    return max(0.0, alpha - scene.decay_slope * offset - drop)


@dataclass(frozen=True)
class BeamSolution:
    theta: float
    alpha: float
    feasible: bool
    reason: Optional[str] = None
    baseline: tuple = field(default=(), compare=False)


def midpoint(scene: Scene2D) -> tuple[float, float]:
    """Bearing halfway along the minor arc between two adversaries, and the half-gap."""
    a0, a1 = scene.adversary_angles
    gap = signed_offset(a0, a1)
    return wrap_angle(a0 + gap / 2), abs(gap) / 2


def solve_two_adversary(scene: Scene2D, interfered_index: int) -> BeamSolution:
    """Beam direction and strength that keep both readings at their no-person values.

    The baseline beam points at the midpoint with strength ``base_strength``.
    Moving the beam delta/(2k) toward the interfered adversary and raising the
    strength by delta/2 cancels the person's drop there while leaving the
    other reading unchanged.
    """
    if len(scene.adversary_angles) != 2:
        raise GeometryError("the gradual-decay solver handles exactly two adversaries")
    if interfered_index not in (0, 1):
        raise ParameterError(f"interfered index must be 0 or 1, got {interfered_index}")
    mid, half_gap = midpoint(scene)
    k, delta, alpha0 = scene.decay_slope, scene.interference_delta, scene.base_strength
    baseline_level = alpha0 - k * half_gap
    baseline = (baseline_level, baseline_level)

    toward = signed_offset(mid, scene.adversary_angles[interfered_index])
    direction = 1.0 if toward >= 0 else -1.0
    theta = wrap_angle(mid + direction * delta / (2 * k))
    alpha = alpha0 + delta / 2

    reason = None
    if not delta < 2 * k * half_gap:
        reason = "angular-separation"
    elif alpha > scene.max_strength:
        reason = "power-limit"
    elif baseline_level <= 0:
        reason = "clamped"
    return BeamSolution(theta, alpha, reason is None, reason, baseline)
