"""Exact distances between a single weighted Dirac and a positive measure.

For molecular ``mu`` the point ``x`` is an index or label of ``mu.space``; for
a density it is a real coordinate.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import MeasureError, NotProbabilityError
from .measures import PROBABILITY_TOL, Measure, MolecularMeasure, mass_radius
from .metric import truncated_distance
from .results import NormResult


def theta0(x, mu: Measure, alpha: float = 1.0) -> float:
    """Smallest maximizing level ``(2 ∧ inf{r : mu(B(x, r)) >= alpha}) - 1``."""
    if not alpha > 0:
        raise MeasureError(f"alpha must be positive, got {alpha}")
    r = mass_radius(mu, x, alpha)
    # r = +inf (not enough mass anywhere) clamps to 1
    return min(2.0, r) - 1.0


def _pair_with_cone(mu: Measure, x, level: float) -> float:
    """``<mu, (-1) ∨ (level - d(x, .))>``."""
    if isinstance(mu, MolecularMeasure):
        if mu.is_zero:
            return 0.0
        vals = np.maximum(-1.0, level - mu.distances_from(x))
        return math.fsum(mu.weights * vals)
    x = float(x)
    reach = level + 1.0
    return mu.integrate(lambda y: max(-1.0, level - abs(x - y)),
                        breakpoints=(x - reach, x, x + reach),
                        tail_from=x + reach, tail_value=-1.0)


def _pair_truncated(mu: Measure, x) -> float:
    """``<mu, 2 ∧ d(x, .)>``."""
    if isinstance(mu, MolecularMeasure):
        if mu.is_zero:
            return 0.0
        return math.fsum(mu.weights * truncated_distance(mu.distances_from(x)))
    x = float(x)
    return mu.integrate(lambda y: min(2.0, abs(x - y)), breakpoints=(x - 2.0, x, x + 2.0),
                        tail_from=x + 2.0, tail_value=2.0)


def fm_dirac_vs_probability(x, mu: Measure) -> NormResult:
    """``||δ_x - mu||`` for a probability measure ``mu``: ``<mu, 2 ∧ d(x, .)>``.

    A total mass within ``PROBABILITY_TOL`` of one is renormalized to exactly one.
    """
    if isinstance(mu, MolecularMeasure) and not mu.is_positive:
        raise MeasureError("mu must be a positive measure")
    total = mu.total_mass
    if abs(total - 1.0) > PROBABILITY_TOL:
        raise NotProbabilityError(
            f"mu has total mass {total!r}; use fm_weighted_dirac_vs_positive for general positive measures")
    value = _pair_truncated(mu, x) / total
    return NormResult(value=value, maximizer=np.array([1.0]), method="closed_form", theta=np.array([1.0]))


def fm_weighted_dirac_vs_positive(alpha: float, x, mu: Measure) -> NormResult:
    """``||alpha δ_x - mu||`` for any positive ``mu`` via the optimal level ``theta0``."""
    if isinstance(mu, MolecularMeasure) and not mu.is_positive:
        raise MeasureError("mu must be a positive measure")
    t0 = theta0(x, mu, alpha)
    value = alpha * t0 - _pair_with_cone(mu, x, t0)
    return NormResult(value=value, maximizer=np.array([t0]), method="closed_form",
                      theta=np.array([t0]), theta0=t0)


def fm_two_weighted_diracs(alpha: float, x, beta: float, y, space=None) -> NormResult:
    """``||alpha δ_x - beta δ_y||``.

    ``x`` and ``y`` are points of ``space`` when it is given, otherwise
    coordinates (scalars or vectors) in Euclidean space. ``x = y`` is allowed.
    """
    if not (alpha > 0 and beta > 0):
        raise MeasureError("weights must be positive")
    if space is not None:
        distance = float(space.d[space.index(x), space.index(y)])
    else:
        distance = float(np.linalg.norm(np.atleast_1d(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))))
    value = abs(alpha - beta) + min(alpha, beta) * truncated_distance(distance)
    t0 = distance - 1.0 if (alpha <= beta and distance < 2.0) else 1.0
    return NormResult(value=value, maximizer=np.array([t0]), method="closed_form",
                      theta=np.array([t0]), theta0=t0)


def phi(alpha: float, x, mu: Measure, level) -> np.ndarray | float:
    """Scalar objective ``<alpha δ_x - mu, (-1) ∨ (level - d(x, .))>`` whose maximum is the norm."""
    levels = np.atleast_1d(np.asarray(level, dtype=float))
    out = np.array([alpha * t - _pair_with_cone(mu, x, t) for t in levels])
    return out if np.ndim(level) else float(out[0])
