"""Brute-force checks for the LP and envelope machinery. Not used by the solvers."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import HalfspaceIntersection

from .envelope import envelope_values, psi
from .errors import OracleError
from .measures import DensityMeasure1D, MolecularMeasure, jordan_decompose, total_variation
from .polytope import Polytope

MAX_GRID_DIM = 5
MAX_VERTEX_DIM = 6
EXHAUSTIVE_LIMIT = 200_000
DENSITY_GRID_LIMIT = 5_000
COMBINATORIAL_LIMIT = 200_000
DEDUP_TOL = 1e-9
FEAS_TOL = 1e-9


@dataclass(frozen=True)
class GridBound:
    lower: float
    upper: float
    argmax: np.ndarray
    step: float
    evaluations: int

    def __iter__(self):
        yield self.lower
        yield self.upper

    def contains(self, value: float, tol: float = 0.0) -> bool:
        return self.lower - tol <= value <= self.upper + tol


def grid_axis(step: float) -> np.ndarray:
    """Grid on ``[-1, 1]`` with spacing at most ``step``, odd point count, exact endpoints."""
    if not step > 0:
        raise ValueError("grid step must be positive")
    k = int(math.ceil(2.0 / step - 1e-12))
    k += k % 2
    axis = np.linspace(-1.0, 1.0, k + 1)
    axis[k // 2] = 0.0
    return axis


class _Objective:
    """``ψ`` on grid indices, split as ``ψ_plus - ψ_minus``.

    Both parts are nondecreasing in ``θ``. The centers are the atoms of
    ``plus``, so ``ψ(θ) = F(P(θ))`` where ``P(θ) = h_θ(centers)`` and
    ``F(θ) = Σ α_i θ_i - Σ_j β_j max(-1, max_i(θ_i - d_ij))`` is concave.
    """

    def __init__(self, plus, minus, space, centers, axis):
        self.plus, self.minus = plus, minus
        self.space, self.centers, self.axis = space, centers, axis
        self.count = 0
        self.dcc = space.d[np.ix_(centers, centers)]
        self.dcm = space.d[np.ix_(centers, minus.indices)] if not minus.is_zero else np.zeros((len(centers), 0))
        self.alpha = plus.weights
        self.beta = minus.weights if not minus.is_zero else np.zeros(0)

    def parts(self, idx: np.ndarray):
        thetas = self.axis[idx]
        self.count += thetas.shape[0]
        p = envelope_values(thetas, self.dcc) @ self.alpha
        m = envelope_values(thetas, self.dcm) @ self.beta if self.beta.size else np.zeros(thetas.shape[0])
        return p, m

    def values(self, idx: np.ndarray) -> np.ndarray:
        p, m = self.parts(idx)
        return p - m

    def projected(self, idx: np.ndarray) -> np.ndarray:
        return envelope_values(self.axis[idx], self.dcc)

    def supergradient(self, theta: np.ndarray) -> np.ndarray:
        """Supergradient of ``F`` at each row of ``theta``."""
        B, n = theta.shape
        grad = np.tile(self.alpha, (B, 1))
        if not self.beta.size:
            return grad
        pieces = theta[:, :, None] - self.dcm[None, :, :]
        top = pieces.argmax(axis=1)
        h = np.take_along_axis(pieces, top[:, None, :], axis=1)[:, 0, :]
        w = np.where(h > -1.0, self.beta[None, :], 0.0)
        for i in range(n):
            grad[:, i] -= np.sum(np.where(top == i, w, 0.0), axis=1)
        return grad


def _reduced_side(tau: MolecularMeasure):
    """``(plus, minus)`` with ``plus`` the centers; the sign of ``τ`` is flipped when needed."""
    parts = jordan_decompose(tau)
    pos, neg = parts.positive, parts.negative
    if pos.is_zero or (not neg.is_zero and len(neg) < len(pos)):
        return neg, pos
    return pos, neg


def _exhaustive(obj: _Objective, n: int, k: int):
    best, arg = -math.inf, None
    total = k ** n
    chunk = max(1, 2 ** 16)
    for start in range(0, total, chunk):
        flat = np.arange(start, min(total, start + chunk))
        idx = np.stack(np.unravel_index(flat, (k,) * n), axis=1)
        vals = obj.values(idx)
        j = int(np.argmax(vals))
        if vals[j] > best:
            best, arg = float(vals[j]), idx[j]
    return best, arg


def _branch_and_bound(obj: _Objective, n: int, k: int, lipschitz: float):
    """Exact maximum of ``ψ`` over the index grid ``{0..k-1}^n``.

    A box ``[lo, hi]`` is bounded three ways and the smallest bound is used:
    monotonicity (``ψ_plus(hi) - ψ_minus(lo)``), concavity of ``F`` over the
    box ``[P(lo), P(hi)]`` that contains the projected box, and the
    ``||τ||_TV`` Lipschitz bound.
    """
    step = obj.axis[1] - obj.axis[0]
    coarse = max(1, (k - 1) // 16)
    seed_axis = np.arange(0, k, coarse)
    if seed_axis[-1] != k - 1:
        seed_axis = np.append(seed_axis, k - 1)
    mesh = np.stack(np.meshgrid(*([seed_axis] * n), indexing="ij"), axis=-1).reshape(-1, n)
    vals = obj.values(mesh)
    j = int(np.argmax(vals))
    best, arg = float(vals[j]), mesh[j]

    heap = [(-math.inf, 0, np.zeros(n, dtype=int), np.full(n, k - 1))]
    counter = 1
    while heap:
        batch = []
        while heap and len(batch) < 4096:
            neg_ub, _, lo, hi = heapq.heappop(heap)
            if -neg_ub <= best:
                heap = []
                break
            batch.append((lo, hi))
        if not batch:
            break
        los = np.array([b[0] for b in batch])
        his = np.array([b[1] for b in batch])
        mids = (los + his) // 2
        mv = obj.values(mids)
        jm = int(np.argmax(mv))
        if mv[jm] > best:
            best, arg = float(mv[jm]), mids[jm]
        plus_hi, _ = obj.parts(his)
        _, minus_lo = obj.parts(los)
        m = obj.projected(mids)
        g = obj.supergradient(m)
        plo, phi = obj.projected(los), obj.projected(his)
        concave = mv + np.sum(np.maximum(g * (plo - m), g * (phi - m)), axis=1)
        radius = np.max(np.maximum(mids - los, his - mids), axis=1) * step
        ub = np.minimum(np.minimum(plus_hi - minus_lo, concave), mv + lipschitz * radius)
        for b in np.nonzero(ub > best)[0]:
            lo, hi = los[b], his[b]
            if np.array_equal(lo, hi):
                continue
            d = int(np.argmax(hi - lo))
            cut = (lo[d] + hi[d]) // 2
            hi1 = hi.copy()
            hi1[d] = cut
            lo2 = lo.copy()
            lo2[d] = cut + 1
            for cl, ch in ((lo, hi1), (lo2, hi)):
                heapq.heappush(heap, (-float(ub[b]), counter, cl, ch))
                counter += 1
    return best, arg


def grid_norm(tau, grid_step: float, mu=None) -> GridBound:
    """Grid maximum of ``ψ_τ`` over ``[-1, 1]^N`` and a certified upper bound on the norm.

    ``tau`` is a molecular measure, or a positive molecular ``ν`` when ``mu``
    (molecular or density) is given, meaning ``τ = ν - μ``. ``N`` is the
    size of the reduced side: the smaller Jordan part for molecular ``τ``,
    the support of ``ν`` for a density ``μ``.
    """
    axis = grid_axis(grid_step)
    step = float(axis[1] - axis[0])
    k = axis.size

    if isinstance(mu, DensityMeasure1D):
        nu = tau
        if not nu.is_positive or nu.is_zero:
            raise OracleError("ν must be a nonzero positive measure")
        n = len(nu)
        if n > MAX_GRID_DIM or k ** n > DENSITY_GRID_LIMIT:
            raise OracleError(f"density grid with {k}^{n} points is too large")
        idx = np.stack(np.unravel_index(np.arange(k ** n), (k,) * n), axis=1)
        terms = [(1.0, nu), (-1.0, mu)]
        vals = np.array([psi(terms, axis[i], nu.space, nu.indices) for i in idx])
        j = int(np.argmax(vals))
        tv = nu.total_mass + mu.total_mass
        return GridBound(float(vals[j]), float(vals[j]) + tv * step / 2, axis[idx[j]], step, int(vals.size))

    if mu is not None:
        tau = tau - mu
    if not isinstance(tau, MolecularMeasure):
        raise TypeError("tau must be a MolecularMeasure")
    if tau.is_zero:
        return GridBound(0.0, 0.0, np.zeros(0), step, 0)
    plus, minus = _reduced_side(tau)
    n = len(plus)
    if n > MAX_GRID_DIM:
        raise OracleError(f"reduced dimension {n} exceeds {MAX_GRID_DIM}")
    obj = _Objective(plus, minus, tau.space, plus.indices, axis)
    tv = total_variation(tau)
    if k ** n <= EXHAUSTIVE_LIMIT:
        best, arg = _exhaustive(obj, n, k)
    else:
        best, arg = _branch_and_bound(obj, n, k, tv)
    return GridBound(best, best + tv * step / 2, axis[np.asarray(arg)], step, obj.count)


def _dedupe(points) -> np.ndarray:
    out: list[np.ndarray] = []
    for p in points:
        if not any(np.max(np.abs(p - q)) <= DEDUP_TOL for q in out):
            out.append(p)
    if not out:
        return np.zeros((0, 0))
    out.sort(key=lambda v: tuple(np.round(v, 9)))
    return np.array(out)


def _check_bounded(p: Polytope):
    n = p.dim
    for i in range(n):
        for s in (1.0, -1.0):
            c = np.zeros(n)
            c[i] = s
            res = linprog(-c, A_ub=p.A, b_ub=p.b, bounds=[(None, None)] * n, method="highs")
            if res.status == 3:
                raise OracleError("polytope is unbounded")
            if res.status == 2:
                raise OracleError("polytope is empty")


def _combinatorial(p: Polytope):
    n = p.dim
    pts = []
    for rows in combinations(range(p.n_rows), n):
        A = p.A[list(rows)]
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        v = np.linalg.solve(A, p.b[list(rows)])
        if p.contains(v, FEAS_TOL):
            pts.append(v)
    return pts


def _qhull(p: Polytope):
    n = p.dim
    # Chebyshev center as the interior point
    norms = np.linalg.norm(p.A, axis=1)
    res = linprog(np.append(np.zeros(n), -1.0), A_ub=np.column_stack([p.A, norms]), b_ub=p.b,
                  bounds=[(None, None)] * n + [(0, None)], method="highs")
    if res.status != 0 or res.x[-1] <= 1e-9:
        raise OracleError("polytope has no interior; use the combinatorial enumerator")
    hs = HalfspaceIntersection(np.column_stack([p.A, -p.b]), res.x[:n])
    pts = []
    for v in hs.intersections:
        # polish each vertex on its tight rows
        tight = np.nonzero(np.abs(p.A @ v - p.b) <= 1e-7)[0]
        if tight.size >= n:
            v = np.linalg.lstsq(p.A[tight], p.b[tight], rcond=None)[0]
        if p.contains(v, 1e-7):
            pts.append(v)
    return pts


def vertex_enumerate(p: Polytope) -> np.ndarray:
    """All vertices of a bounded polytope of dimension at most 6, as rows."""
    n = p.dim
    if n > MAX_VERTEX_DIM:
        raise OracleError(f"dimension {n} exceeds {MAX_VERTEX_DIM}")
    _check_bounded(p)
    if n == 1:
        a, b = p.A[:, 0], p.b
        upper = np.min(b[a > 0] / a[a > 0])
        lower = np.max(b[a < 0] / a[a < 0])
        return _dedupe([np.array([lower]), np.array([upper])])
    if math.comb(p.n_rows, n) <= COMBINATORIAL_LIMIT:
        pts = _combinatorial(p)
    else:
        pts = _qhull(p)
    return _dedupe(pts)
