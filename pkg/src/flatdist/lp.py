"""Exact FM and BL norms of molecular measures by linear programming."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .envelope import envelope_values
from .errors import ConvergenceError, MeasureError
from .measures import MolecularMeasure, jordan_decompose, total_variation
from .polytope import Polytope, bl_ball_polytope, fm_ball_polytope
from .results import NormResult
from .simplex import LPSolution, solve_lp

__all__ = [
    "LPSolution",
    "Polytope",
    "bl_ball_polytope",
    "bl_norm_molecular",
    "fm_ball_polytope",
    "fm_norm_molecular",
    "fm_norm_molecular_reduced",
    "fm_norm_pinned",
    "ReducedSolution",
    "reduced_polytope",
    "solve_lp",
    "solve_reduced",
]

# Above this many (reduced side x other side) epigraph constraints the
# cutting-plane solver replaces the dense tableau.
DENSE_EPIGRAPH_LIMIT = 2_000
CUTTING_PLANE_MAX_ITER = 20_000


def _support_metric(tau: MolecularMeasure):
    return tau.space.metric.submatrix(tau.indices)


def _check(sol: LPSolution):
    if sol.status != "optimal":  # pragma: no cover - ball polytopes are bounded and contain 0
        raise ArithmeticError(f"unexpected LP status {sol.status}")


def _clean(x: np.ndarray) -> np.ndarray:
    return np.asarray(x, dtype=float) + 0.0  # drops negative zeros


def fm_norm_molecular(tau: MolecularMeasure) -> NormResult:
    """``max{Σ α_i f_i : f in the FM ball on supp τ}``.

    The walk starts at the vertex ``(1, ..., 1)`` when ``Σ α_i >= 0`` and at
    ``(-1, ..., -1)`` otherwise.
    """
    if tau.is_zero:
        return NormResult(0.0, np.zeros(0), "lp")
    poly = fm_ball_polytope(_support_metric(tau))
    start = np.ones(len(tau)) if tau.total_mass >= 0 else -np.ones(len(tau))
    sol = solve_lp(tau.weights, poly, warm_start=start)
    _check(sol)
    return NormResult(sol.value, _clean(sol.f), "lp", iterations=sol.iterations)


def bl_norm_molecular(tau: MolecularMeasure) -> NormResult:
    """``max{Σ α_i f_i : ||f||_inf + |f|_L <= 1 on supp τ}``."""
    if tau.is_zero:
        return NormResult(0.0, np.zeros(0), "lp")
    poly = bl_ball_polytope(_support_metric(tau))
    start = np.ones(len(tau)) if tau.total_mass >= 0 else -np.ones(len(tau))
    sol = solve_lp(tau.weights, poly, warm_start=start)
    _check(sol)
    return NormResult(sol.value, _clean(sol.f), "lp", iterations=sol.iterations)


def reduced_polytope(dist: np.ndarray) -> Polytope:
    """Constraints of the epigraph LP in ``(θ, t)``.

    ``θ in [-1, 1]^N``, ``t_j >= -1`` and ``t_j >= θ_i - dist[i, j]``.
    """
    N, M = dist.shape
    rows, b, tags = [], [], []
    for i in range(N):
        for sign in (1.0, -1.0):
            r = np.zeros(N + M)
            r[i] = sign
            rows.append(r)
            b.append(1.0)
            tags.append(("box", i, int(sign)))
    for j in range(M):
        r = np.zeros(N + M)
        r[N + j] = -1.0
        rows.append(r)
        b.append(1.0)
        tags.append(("floor", j))
        for i in range(N):
            r = np.zeros(N + M)
            r[i] = 1.0
            r[N + j] = -1.0
            rows.append(r)
            b.append(dist[i, j])
            tags.append(("epigraph", j, i))
    return Polytope(np.array(rows), np.array(b), tuple(tags), "reduced")


def _epigraph_objective(alpha, beta, dist, theta):
    """Value and a supergradient of ``Σ α θ - Σ β_j max(-1, max_i(θ_i - d_ij))``."""
    pieces = theta[:, None] - dist
    top = pieces.argmax(axis=0)
    tj = np.maximum(-1.0, pieces[top, np.arange(dist.shape[1])])
    value = float(alpha @ theta - beta @ tj)
    active = tj > -1.0
    grad = alpha - np.bincount(top[active], weights=beta[active], minlength=theta.size)
    return value, grad


def _reduced_dense(alpha, beta, dist):
    N, M = dist.shape
    poly = reduced_polytope(dist)
    theta0 = np.ones(N)
    t0 = np.maximum(-1.0, (theta0[:, None] - dist).max(axis=0)) if N else -np.ones(M)
    sol = solve_lp(np.concatenate([alpha, -beta]), poly, warm_start=np.concatenate([theta0, t0]))
    _check(sol)
    return sol.value, np.clip(sol.f[:N], -1.0, 1.0), sol.iterations


def _reduced_cutting_plane(alpha, beta, dist, gap_tol=None):
    """Kelley's method on the concave piecewise-linear epigraph objective.

    Each master problem is a small LP in ``(θ, z)`` solved by :func:`solve_lp`;
    the objective has finitely many linear pieces, so the loop ends with the
    optimum once the relevant pieces have been cut in. The master value is an
    upper bound throughout, and the loop also stops when the master point no
    longer moves (the remaining gap is then at the LP feasibility tolerance).
    Returns ``(value, θ, iterations, upper_bound)``.
    """
    N = alpha.size
    scale = float(alpha.sum() + beta.sum())
    stop = max(1e-12 * max(1.0, scale), 0.0 if gap_tol is None else gap_tol)
    rows = [np.append(np.eye(N)[i] * s, 0.0) for i in range(N) for s in (1.0, -1.0)]
    rhs = [1.0] * (2 * N)
    tags = [("box", i, int(s)) for i in range(N) for s in (1, -1)]
    rows.append(np.append(np.zeros(N), 1.0))
    rhs.append(scale)
    tags.append(("bound",))
    c = np.append(np.zeros(N), 1.0)

    theta = np.ones(N)
    best_val, best_theta = -math.inf, theta
    cut_rows, cut_rhs = [], []
    for it in range(1, CUTTING_PLANE_MAX_ITER + 1):
        val, grad = _epigraph_objective(alpha, beta, dist, theta)
        if val > best_val:
            best_val, best_theta = val, theta
        cut_rows.append(np.append(-grad, 1.0))
        cut_rhs.append(val - grad @ theta)
        A = np.vstack(rows + cut_rows)
        b = np.array(rhs + cut_rhs)
        poly = Polytope(A, b, tuple(tags) + tuple(("cut", k) for k in range(len(cut_rows))), "master")
        cuts = np.array(cut_rows)
        z0 = min(scale, float(np.min(np.array(cut_rhs) - cuts[:, :N] @ theta)))
        sol = solve_lp(c, poly, warm_start=np.append(theta, z0))
        _check(sol)
        upper = max(sol.value, best_val)
        new_theta = np.clip(sol.f[:N], -1.0, 1.0)
        if upper - best_val <= stop or np.array_equal(new_theta, theta):
            return best_val, best_theta, it, upper
        theta = new_theta
    raise ConvergenceError(f"cutting-plane solver did not close the gap in {CUTTING_PLANE_MAX_ITER} iterations")


@dataclass(frozen=True)
class ReducedSolution:
    value: float
    theta: np.ndarray
    iterations: int
    method: str
    upper_bound: float


def solve_reduced(alpha, beta, dist, solver: str = "auto", gap_tol: float | None = None) -> ReducedSolution:
    """Maximize ``Σ α_i θ_i - Σ β_j max(-1, max_i(θ_i - dist[i, j]))`` over ``θ in [-1, 1]^N``.

    ``gap_tol`` lets the cutting-plane solver stop early; ``upper_bound`` is
    then a certified bound on the optimum (equal to ``value`` for the dense solver).
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    dist = np.asarray(dist, dtype=float).reshape(alpha.size, beta.size)
    if solver == "auto":
        solver = "dense" if dist.size <= DENSE_EPIGRAPH_LIMIT else "cutting_plane"
    if beta.size == 0:
        total = float(alpha.sum())
        return ReducedSolution(total, np.ones(alpha.size), 0, solver, total)
    if solver == "dense":
        value, theta, iters = _reduced_dense(alpha, beta, dist)
        return ReducedSolution(value, theta, iters, solver, value)
    if solver == "cutting_plane":
        value, theta, iters, upper = _reduced_cutting_plane(alpha, beta, dist, gap_tol)
        return ReducedSolution(value, theta, iters, solver, upper)
    raise ValueError(f"unknown solver {solver!r}")


def fm_norm_molecular_reduced(tau: MolecularMeasure, solver: str = "auto") -> NormResult:
    """FM norm through the epigraph LP over the smaller Jordan part.

    ``maximizer`` holds the optimal test function on all of ``supp τ`` and
    ``theta`` the optimal levels on the reduced side.
    """
    parts = jordan_decompose(tau)
    pos, neg = parts.positive, parts.negative
    if pos.is_zero or neg.is_zero:
        raise MeasureError("τ is one-signed; its norm is total_variation(τ)")
    sign = 1.0
    if len(neg) < len(pos):
        pos, neg, sign = neg, pos, -1.0
    dist = tau.space.d[np.ix_(pos.indices, neg.indices)]
    sol = solve_reduced(pos.weights, neg.weights, dist, solver)
    h = envelope_values(sol.theta, tau.space.d[np.ix_(pos.indices, tau.indices)])
    return NormResult(sol.value, _clean(sign * h), "lp_reduced", iterations=sol.iterations, theta=sol.theta)


def fm_norm_pinned(tau: MolecularMeasure, candidates=None) -> NormResult:
    """Best FM-LP value over test functions with ``f_i = 1`` at some candidate atom.

    ``candidates`` are positions in ``τ``'s atom list (default: positive atoms).
    """
    if tau.is_zero:
        return NormResult(0.0, np.zeros(0), "lp_pinned")
    n = len(tau)
    poly = fm_ball_polytope(_support_metric(tau))
    if candidates is None:
        candidates = np.nonzero(tau.weights > 0)[0]
    best = None
    for i in candidates:
        row = np.zeros(n)
        row[i] = -1.0
        pinned = poly.with_rows(row, -1.0, [("pin", int(i))])
        sol = solve_lp(tau.weights, pinned, warm_start=np.ones(n))
        _check(sol)
        if best is None or sol.value > best.value:
            best = sol
    if best is None:
        raise MeasureError("no candidate atoms to pin")
    return NormResult(best.value, _clean(best.f), "lp_pinned", iterations=best.iterations)
