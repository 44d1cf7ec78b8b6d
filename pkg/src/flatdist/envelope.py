"""Envelope test functions ``h_θ`` and the objective ``ψ_τ(θ) = <τ, h_θ>``.

``h_θ(y) = max(-1, max_i(θ_i - d(x_i, y)))`` over reference points ``x_i``
(the *centers*). The centers are points of a :class:`FiniteMetricSpace`;
density parts of ``τ`` additionally need that space to be 1-D.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .errors import MeasureError
from .measures import DensityMeasure1D, MolecularMeasure
from .metric import FiniteMetricSpace
from .polytope import MEMBERSHIP_TOL, bl_ball_polytope, fm_ball_polytope

THETA_TOL = 1e-12


def as_theta(values) -> np.ndarray:
    """Validate a point of ``[-1, 1]^N``; entries within ``THETA_TOL`` outside are clamped."""
    t = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(t)):
        raise ValueError("theta must be finite")
    if np.any(np.abs(t) > 1.0 + THETA_TOL):
        raise ValueError(f"theta outside [-1, 1]: {t}")
    return np.clip(t, -1.0, 1.0)


def upper_envelope(pieces: np.ndarray, axis: int = 0) -> np.ndarray:
    """Pointwise maximum of affine pieces along ``axis``."""
    return np.max(pieces, axis=axis)


def envelope_values(theta, dist: np.ndarray) -> np.ndarray:
    """``h_θ`` at query points, given ``dist[i, j] = d(x_i, y_j)``.

    ``theta`` may be a batch of shape ``(B, N)``; the result then has shape ``(B, M)``.
    """
    theta = np.asarray(theta, dtype=float)
    if dist.shape[0] == 0:
        return np.full(theta.shape[:-1] + dist.shape[1:], -1.0)
    pieces = theta[..., :, None] - dist
    return np.maximum(-1.0, upper_envelope(pieces, axis=-2))


def _center_indices(space: FiniteMetricSpace, centers) -> np.ndarray:
    return np.array([space.index(c) for c in centers], dtype=int)


def _is_coordinate(y) -> bool:
    return isinstance(y, (float, np.floating)) or (isinstance(y, np.ndarray) and y.dtype.kind == "f")


def h_theta(theta, space: FiniteMetricSpace, centers: Sequence, y):
    """Evaluate ``h_θ`` at ``y``.

    ``y`` is a point of ``space`` (int index or label), or a float / float
    array of coordinates when ``space`` lies on the real line.
    """
    theta = as_theta(theta)
    cidx = _center_indices(space, centers)
    if theta.shape[-1] != cidx.size:
        raise ValueError(f"theta has {theta.shape[-1]} entries for {cidx.size} centers")
    if _is_coordinate(y):
        ys = np.atleast_1d(np.asarray(y, dtype=float))
        dist = np.abs(space.line_coords[cidx][:, None] - ys[None, :])
        out = envelope_values(theta, dist)
        return out if np.ndim(y) else float(out[..., 0])
    dist = space.d[cidx, space.index(y)][:, None]
    return float(envelope_values(theta, dist)[0])


def kink_points(theta: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Sorted breakpoints of ``h_θ`` on the line: centers, floor crossings, piece crossings."""
    pts = [x, x - theta - 1.0, x + theta + 1.0]
    i, j = np.triu_indices(x.size, 1)
    if i.size:
        s = x[i] + x[j]
        dt = theta[i] - theta[j]
        pts += [0.5 * (s + dt), 0.5 * (s - dt)]
    return np.unique(np.concatenate(pts))


def _terms(tau) -> list[tuple[float, object]]:
    if isinstance(tau, (MolecularMeasure, DensityMeasure1D)):
        return [(1.0, tau)]
    out = []
    for coef, part in tau:
        if not isinstance(part, (MolecularMeasure, DensityMeasure1D)):
            raise TypeError(f"unsupported measure {type(part).__name__}")
        out.append((float(coef), part))
    return out


def _pair_density(mu: DensityMeasure1D, theta: np.ndarray, x: np.ndarray) -> float:
    if x.size == 0:
        return -mu.total_mass
    reach = float(np.max(x + theta + 1.0))

    def h(y):
        return max(-1.0, float(np.max(theta - np.abs(x - y))))

    return mu.integrate(h, breakpoints=kink_points(theta, x), tail_from=reach, tail_value=-1.0)


def psi(tau, theta, space: FiniteMetricSpace, centers: Sequence) -> float:
    """``<τ, h_θ>`` for a measure or a signed combination ``[(coef, measure), ...]``.

    Molecular parts are summed exactly; density parts use adaptive quadrature
    split at every kink of ``h_θ``, with the constant ``-1`` tail beyond the
    last kink taken from the tail mass.
    """
    theta = as_theta(theta)
    cidx = _center_indices(space, centers)
    if theta.shape != (cidx.size,):
        raise ValueError(f"theta has shape {theta.shape} for {cidx.size} centers")
    parts = []
    for coef, part in _terms(tau):
        if isinstance(part, MolecularMeasure):
            if part.is_zero:
                continue
            if not part.space.compatible(space):
                raise MeasureError("molecular part lives on a different space than the centers")
            dist = space.d[np.ix_(cidx, part.indices)]
            h = envelope_values(theta, dist)
            parts.append(coef * math.fsum(part.weights * h))
        else:
            parts.append(coef * _pair_density(part, theta, space.line_coords[cidx]))
    return math.fsum(parts)


def psi_batch(tau, thetas: np.ndarray, space: FiniteMetricSpace, centers: Sequence) -> np.ndarray:
    """Vectorized :func:`psi` over rows of ``thetas``; molecular parts only."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    cidx = _center_indices(space, centers)
    out = np.zeros(thetas.shape[0])
    for coef, part in _terms(tau):
        if not isinstance(part, MolecularMeasure):
            raise TypeError("psi_batch supports molecular measures only")
        if part.is_zero:
            continue
        dist = space.d[np.ix_(cidx, part.indices)]
        out += coef * (envelope_values(thetas, dist) @ part.weights)
    return out


def in_ball(values, space: FiniteMetricSpace, centers: Sequence, kind: str = "FM",
            tol: float = MEMBERSHIP_TOL) -> bool:
    """Membership of a vector of values on ``centers`` in the FM or BL unit ball."""
    cidx = _center_indices(space, centers)
    sub = space.metric.submatrix(cidx)
    poly = fm_ball_polytope(sub) if kind == "FM" else bl_ball_polytope(sub)
    return poly.contains(values, tol)


def envelope_of(g, space: FiniteMetricSpace, centers: Sequence, kind: str = "FM"):
    """Smallest-type extension ``y ↦ h_{g}(y)`` of ``g`` from ``centers`` to the space.

    The returned callable accepts the same ``y`` as :func:`h_theta`. It is
    1-Lipschitz, bounded by 1 and equal to ``g`` on the centers.
    """
    g = np.asarray(g, dtype=float)
    if kind != "FM":
        raise ValueError("envelope_of is defined for the FM ball")
    if not in_ball(g, space, centers, kind):
        raise ValueError("g is not in the FM unit ball on the given centers")
    theta = as_theta(g)
    centers = list(centers)

    def envelope(y):
        return h_theta(theta, space, centers, y)

    return envelope


def mcshane_upper(g, space: FiniteMetricSpace, centers: Iterable, y) -> float:
    """``min(1, min_i(g_i + d(x_i, y)))``: the largest ball element extending ``g``."""
    cidx = _center_indices(space, centers)
    dist = space.d[cidx, space.index(y)]
    return float(min(1.0, np.min(np.asarray(g, dtype=float) + dist)))
