"""Pairwise interaction potential with finite cutoff.

The potential of one agent pair depends only on the separation r = ||z||.
Its radial slope (the signed magnitude of the gradient) is the primary
definition:

    r <= d:       inner_gain * (r - d) / r          (repulsive, diverges at 0)
    d < r <= R:   mid_gain * sin(2*pi*(r - d))      (restoring toward d)
    r > R:        0                                 (out of range)

Values follow by antiderivative with the constants fixed by value(d) = 0 and
continuity at the branch boundaries, so the value is flat (a positive plateau)
beyond the cutoff. The minimum sits at the desired distance d and the value
diverges logarithmically as r -> 0, which is what rules out contact between
connected agents along any trajectory with bounded energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

# Below this separation the pair model is already meaningless; abort rather
# than overflow silently.
COLLISION_EPS = 1e-12


class ZeroSeparation(ArithmeticError):
    """Two connected agents are (numerically) on top of each other."""


class PropertyViolation(ValueError):
    """A required shape property of the potential failed a numeric check."""


@dataclass(frozen=True)
class PotentialParams:
    """Shape parameters of the pairwise potential for a single edge."""

    desired_distance: float
    cutoff_radius: float
    inner_gain: float = 20.0
    mid_gain: float = TWO_PI

    def __post_init__(self):
        if not 0.0 < self.desired_distance < self.cutoff_radius:
            raise ValueError(
                "need 0 < desired_distance < cutoff_radius, got "
                f"d={self.desired_distance}, R={self.cutoff_radius}"
            )
        if self.inner_gain <= 0.0 or self.mid_gain <= 0.0:
            raise ValueError("potential gains must be positive")


def _check_separation(r: np.ndarray) -> None:
    if np.any(r < COLLISION_EPS):
        raise ZeroSeparation(
            f"separation {float(np.min(r)):.3e} m below {COLLISION_EPS:.0e} m"
        )


def _slope(r, d, cutoff, inner_gain, mid_gain):
    """Vectorized radial slope; ``d`` may be scalar or per-edge array."""
    inner = inner_gain * (r - d) / r
    mid = mid_gain * np.sin(TWO_PI * (r - d))
    return np.where(r > cutoff, 0.0, np.where(r <= d, inner, mid))


def _value(r, d, cutoff, inner_gain, mid_gain):
    """Vectorized value, continuous across branches, zero at r = d."""
    base = (mid_gain / TWO_PI) * (1.0 - np.cos(TWO_PI * (np.minimum(r, cutoff) - d)))
    inner = inner_gain * ((r - d) - d * np.log(r / d))
    return np.where(r <= d, inner, base)


def radial_slope(params: PotentialParams, r):
    """Signed slope dV/dr at separation r (scalar or array)."""
    arr = np.atleast_1d(np.asarray(r, dtype=float))
    _check_separation(arr)
    out = _slope(arr, params.desired_distance, params.cutoff_radius,
                 params.inner_gain, params.mid_gain)
    return float(out[0]) if np.isscalar(r) or np.ndim(r) == 0 else out


def radial_value(params: PotentialParams, r):
    """Potential value at separation r (scalar or array)."""
    arr = np.atleast_1d(np.asarray(r, dtype=float))
    _check_separation(arr)
    out = _value(arr, params.desired_distance, params.cutoff_radius,
                 params.inner_gain, params.mid_gain)
    return float(out[0]) if np.isscalar(r) or np.ndim(r) == 0 else out


def gradient(params: PotentialParams, z) -> np.ndarray:
    """Gradient of the pair potential with respect to the first agent.

    ``z`` is the separation vector q_i - q_j of one edge. Antisymmetric in z,
    so the gradient with respect to the second agent is the negative.
    """
    z = np.asarray(z, dtype=float)
    r = float(np.linalg.norm(z))
    _check_separation(np.asarray(r))
    s = _slope(r, params.desired_distance, params.cutoff_radius,
               params.inner_gain, params.mid_gain)
    return (s / r) * z


def value(params: PotentialParams, z) -> float:
    """Potential value for the separation vector z of one edge."""
    z = np.asarray(z, dtype=float)
    return radial_value(params, float(np.linalg.norm(z)))


@dataclass(frozen=True)
class PotentialReport:
    """Outcome of the numeric shape checks over a log-spaced radius grid."""

    diverges_at_contact: bool
    minimum_at_desired_distance: bool
    tail_slope_bounded: bool
    value_at_smallest_radius: float
    plateau_value: float
    max_tail_slope: float

    @property
    def all_passed(self) -> bool:
        return (
            self.diverges_at_contact
            and self.minimum_at_desired_distance
            and self.tail_slope_bounded
        )


def check_properties(
    params: PotentialParams,
    r_min: float = 1e-6,
    r_max: float = 1e3,
    samples: int = 4000,
) -> PotentialReport:
    """Sample the value and slope on a log grid and test the required shape.

    Checks, in order: the value grows monotonically without bound as the
    separation approaches zero; the unique minimum on (0, R] sits at the
    desired distance with value zero; and the gradient stays bounded (here:
    exactly zero) beyond the cutoff. Raises PropertyViolation naming the first
    failed check.
    """
    d, R = params.desired_distance, params.cutoff_radius
    grid = np.geomspace(r_min, r_max, samples)
    vals = radial_value(params, grid)
    plateau = radial_value(params, R)

    # divergence toward contact: strictly decreasing in r below d/2, and the
    # innermost sample towers over the plateau scale
    below = grid[grid <= d / 2.0]
    vals_below = radial_value(params, below)
    decreasing = bool(np.all(np.diff(vals_below) < 0.0))
    big_enough = vals_below[0] > 10.0 * (1.0 + plateau)
    diverges = decreasing and big_enough
    if not diverges:
        raise PropertyViolation(
            "divergence-at-contact: value does not grow without bound as the "
            f"separation shrinks (value at {r_min:g} m is {vals_below[0]:.3g})"
        )

    # unique minimum at d on (0, R]
    inside = grid[grid <= R]
    vals_inside = vals[: inside.size]
    arg = int(np.argmin(vals_inside))
    ratio = grid[1] / grid[0]
    at_d = abs(inside[arg] - d) <= 3.0 * d * (ratio - 1.0)
    zero_at_d = abs(radial_value(params, d)) <= 1e-12
    left = inside[inside < d]
    right = inside[(inside > d) & (inside <= R)]
    monotone = bool(
        np.all(np.diff(radial_value(params, left)) < 1e-12)
        and np.all(np.diff(radial_value(params, right)) > -1e-12)
        and radial_value(params, right[-1]) > 1e-12
    )
    unique_min = at_d and zero_at_d and monotone
    if not unique_min:
        raise PropertyViolation(
            "unique-minimum: the value is not minimized solely at the desired "
            f"distance {d} on (0, {R}]"
        )

    tail = grid[grid > R]
    max_tail_slope = float(np.max(np.abs(radial_slope(params, tail)))) if tail.size else 0.0
    bounded = max_tail_slope <= 1e-9
    if not bounded:
        raise PropertyViolation(
            f"bounded-tail: gradient beyond the cutoff reaches {max_tail_slope:.3g}"
        )

    return PotentialReport(
        diverges_at_contact=diverges,
        minimum_at_desired_distance=unique_min,
        tail_slope_bounded=bounded,
        value_at_smallest_radius=float(vals_below[0]),
        plateau_value=float(plateau),
        max_tail_slope=max_tail_slope,
    )
