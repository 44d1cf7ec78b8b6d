"""Dense primal simplex for ``max c.f  s.t.  A f <= b`` with free ``f``.

The method walks vertices of the polytope. A vertex is identified by a set
``B`` of ``n`` linearly independent tight rows; the slack of every row is a
nonnegative variable, slacks of rows in ``B`` are the nonbasic ones, and
``f`` stays basic throughout. Pivoting uses Bland's rule on row indices
(smallest leaving row among improving ones, smallest entering row among
ratio-test ties), which rules out cycling on degenerate vertices such as the
corners ``±(1, ..., 1)`` of the ball polytopes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, lu_factor, lu_solve

from .errors import ConvergenceError
from .polytope import Polytope

FEAS_TOL = 1e-9
DUAL_TOL = 1e-11
PIVOT_TOL = 1e-10
RANK_TOL = 1e-9
DEFAULT_MAX_ITER = 100_000


@dataclass(frozen=True)
class LPSolution:
    status: str  # "optimal" | "unbounded" | "infeasible"
    f: np.ndarray | None
    value: float
    iterations: int
    active: tuple[int, ...] = ()


class _Unbounded(Exception):
    pass


def _scaled(A: np.ndarray, b: np.ndarray):
    s = np.abs(A).max(axis=1)
    s[s == 0] = 1.0
    return A / s[:, None], b / s


class _RowSpace:
    """Orthonormal basis of the span of the rows added so far."""

    def __init__(self, n: int):
        self.Q = np.zeros((n, 0))

    def residual(self, v: np.ndarray) -> np.ndarray:
        return v - self.Q @ (self.Q.T @ v)

    def try_add(self, a: np.ndarray) -> bool:
        r = self.residual(a)
        r = self.residual(r)  # second Gram-Schmidt pass for stability
        nr = np.linalg.norm(r)
        if nr <= RANK_TOL * max(1.0, np.linalg.norm(a)):
            return False
        self.Q = np.column_stack([self.Q, r / nr])
        return True


def _purify(c, A, b, x):
    """Move from a feasible ``x`` to a vertex without decreasing ``c.x``.

    Returns ``(x, active_rows, steps)``.
    """
    m, n = A.shape
    space = _RowSpace(n)
    active: list[int] = []
    slack = b - A @ x
    for r in np.nonzero(slack <= FEAS_TOL)[0]:
        if len(active) == n:
            break
        if space.try_add(A[r]):
            active.append(int(r))
    steps = 0
    cnorm = np.linalg.norm(c)
    while len(active) < n:
        d = space.residual(c)
        if np.linalg.norm(d) <= 1e-12 * max(1.0, cnorm):
            # objective is constant on the current face: any null direction will do
            proj = np.array([np.linalg.norm(space.residual(e)) for e in np.eye(n)])
            d = space.residual(np.eye(n)[int(np.argmax(proj > 1e-6))])
            candidates = (d, -d)
        else:
            candidates = (d,)
        for direction in candidates:
            Ad = A @ direction
            mask = Ad > PIVOT_TOL * np.linalg.norm(direction)
            mask[active] = False
            if not mask.any():
                continue
            rows = np.nonzero(mask)[0]
            ratios = np.maximum(b[rows] - A[rows] @ x, 0.0) / Ad[rows]
            tmin = ratios.min()
            r = int(rows[np.nonzero(ratios <= tmin + 1e-13 * (1.0 + tmin))[0][0]])
            x = x + tmin * direction
            space.try_add(A[r]) or _raise_rank()
            active.append(r)
            steps += 1
            break
        else:
            if float(c @ candidates[0]) > 0:
                raise _Unbounded
            raise ValueError("polytope contains a line and has no vertices")
    return x, active, steps


def _raise_rank():
    raise ArithmeticError("blocking row is linearly dependent on the active set")


def _simplex(c, A, b, active, max_iter):
    """Bland-rule vertex walk from the vertex defined by ``active``."""
    m, n = A.shape
    B = list(active)
    it = 0
    cscale = max(1.0, float(np.abs(c).max()) if c.size else 1.0)
    while True:
        try:
            lu = lu_factor(A[B])
        except (LinAlgError, ValueError) as exc:  # pragma: no cover - guarded by rank checks
            raise ArithmeticError("singular basis") from exc
        x = lu_solve(lu, b[B])
        y = lu_solve(lu, c, trans=1)
        improving = np.nonzero(y < -DUAL_TOL * cscale)[0]
        if improving.size == 0:
            return x, B, it
        if it >= max_iter:
            raise ConvergenceError(f"simplex exceeded {max_iter} pivots")
        Barr = np.asarray(B)
        k = int(improving[np.argmin(Barr[improving])])
        e = np.zeros(n)
        e[k] = -1.0
        d = lu_solve(lu, e)
        Ad = A @ d
        mask = Ad > PIVOT_TOL * max(1.0, float(np.abs(d).max()))
        mask[Barr] = False
        if not mask.any():
            raise _Unbounded
        rows = np.nonzero(mask)[0]
        ratios = np.maximum(b[rows] - A[rows] @ x, 0.0) / Ad[rows]
        tmin = ratios.min()
        r = int(rows[np.nonzero(ratios <= tmin + 1e-13 * (1.0 + tmin))[0][0]])
        B[k] = r
        it += 1


def _phase1(A, b, max_iter):
    """Feasible point of ``A f <= b`` via ``min s  s.t.  A f - s <= b, s >= 0``."""
    m, n = A.shape
    A1 = np.zeros((m + 1, n + 1))
    A1[:m, :n] = A
    A1[:m, n] = -1.0
    A1[m, n] = -1.0
    b1 = np.append(b, 0.0)
    c1 = np.zeros(n + 1)
    c1[n] = -1.0
    x0 = np.zeros(n + 1)
    x0[n] = max(0.0, float(-b.min()))
    x, active, steps = _purify(c1, A1, b1, x0)
    x, _, it = _simplex(c1, A1, b1, active, max_iter)
    return x[:n], x[n], steps + it


def solve_lp(c, polytope: Polytope, warm_start=None, max_iter: int = DEFAULT_MAX_ITER) -> LPSolution:
    """Maximize ``c.f`` over ``polytope``.

    ``warm_start`` may be any feasible point; it is first moved to a vertex
    without losing objective value, so passing a known vertex skips phase 1.
    The result is deterministic for identical inputs.
    """
    c = np.asarray(c, dtype=float).reshape(-1)
    if c.size != polytope.dim:
        raise ValueError(f"objective has {c.size} entries, polytope dimension is {polytope.dim}")
    A, b = _scaled(polytope.A, polytope.b)
    iterations = 0
    if warm_start is not None:
        x0 = np.asarray(warm_start, dtype=float).reshape(-1)
        if x0.size != c.size:
            raise ValueError("warm start has the wrong dimension")
        if np.max(A @ x0 - b, initial=-np.inf) > FEAS_TOL:
            raise ValueError("warm start is not feasible")
    elif b.size == 0 or b.min() >= -FEAS_TOL:
        x0 = np.zeros(c.size)
    else:
        try:
            x0, s, iterations = _phase1(A, b, max_iter)
        except _Unbounded:  # pragma: no cover - phase 1 objective is bounded by 0
            raise ArithmeticError("phase 1 reported unbounded")
        if s > FEAS_TOL:
            return LPSolution("infeasible", None, float("nan"), iterations)
    try:
        x, active, steps = _purify(c, A, b, x0)
        x, active, it = _simplex(c, A, b, active, max_iter)
    except _Unbounded:
        return LPSolution("unbounded", None, float("inf"), iterations)
    return LPSolution("optimal", x, float(c @ x), iterations + steps + it, tuple(active))
