"""Half-space descriptions of the FM and BL unit balls restricted to a finite support."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .errors import MetricError
from .metric import DistanceMatrix

MEMBERSHIP_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Polytope:
    """``{f : A f <= b}`` with a provenance tag per row.

    Tags are tuples: ``("box", k, sign)``, ``("lipschitz", i, j)`` for
    ``(f_i - f_j) / d_ij <= 1``, ``("bl-triple", i, j, k, sign)``,
    ``("bl-pair", i, k, sign)``, or ``("epigraph", j, i)`` / ``("floor", j)``
    for reduced formulations.
    """

    A: np.ndarray
    b: np.ndarray
    row_tags: tuple
    kind: str = "general"

    def __post_init__(self):
        A = np.array(self.A, dtype=float, ndmin=2)
        b = np.array(self.b, dtype=float).reshape(-1)
        if A.shape[0] != b.size or len(self.row_tags) != b.size:
            raise ValueError(f"inconsistent polytope: A {A.shape}, b {b.shape}, {len(self.row_tags)} tags")
        A.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "row_tags", tuple(self.row_tags))

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    def residual(self, f) -> np.ndarray:
        """``A f - b``; nonpositive entries are satisfied rows."""
        return self.A @ np.asarray(f, dtype=float) - self.b

    def contains(self, f, tol: float = MEMBERSHIP_TOL) -> bool:
        return bool(np.all(self.residual(f) <= tol))

    def with_rows(self, A_extra, b_extra, tags) -> "Polytope":
        return Polytope(np.vstack([self.A, np.atleast_2d(A_extra)]),
                        np.concatenate([self.b, np.atleast_1d(b_extra)]),
                        self.row_tags + tuple(tags), self.kind)


def _as_matrix(m) -> np.ndarray:
    d = m.d if isinstance(m, DistanceMatrix) else np.asarray(m, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] == 0:
        raise MetricError("expected a nonempty square distance matrix")
    return d


def fm_ball_polytope(m) -> Polytope:
    """``|f_k| <= 1`` and ``|f_i - f_j| <= d_ij`` as ``2n + n(n-1)`` rows."""
    d = _as_matrix(m)
    if not isinstance(m, DistanceMatrix):
        DistanceMatrix(d)  # validates
    n = d.shape[0]
    rows, tags = [], []
    for k in range(n):
        r = np.zeros(n)
        r[k] = 1.0
        rows.append(r)
        tags.append(("box", k, 1))
        rows.append(-r)
        tags.append(("box", k, -1))
    for i in range(n):
        for j in range(i + 1, n):
            r = np.zeros(n)
            r[i], r[j] = 1.0 / d[i, j], -1.0 / d[i, j]
            rows.append(r)
            tags.append(("lipschitz", i, j))
            rows.append(-r)
            tags.append(("lipschitz", j, i))
    return Polytope(np.array(rows), np.ones(len(rows)), tuple(tags), "FM")


def bl_ball_polytope(m) -> Polytope:
    """Unit ball of ``||f||_inf + |f|_L`` on the support.

    For ``n >= 2``: rows ``±(f_k + (f_i - f_j)/d_ij) <= 1`` for distinct
    ``i, j, k`` and ``±(f_k + (f_k - f_i)/d_ik) <= 1`` for ``i != k``. A single
    point has zero Lipschitz seminorm, so its ball is ``[-1, 1]``.
    """
    d = _as_matrix(m)
    if not isinstance(m, DistanceMatrix):
        DistanceMatrix(d)
    n = d.shape[0]
    if n == 1:
        return Polytope(np.array([[1.0], [-1.0]]), np.ones(2), (("box", 0, 1), ("box", 0, -1)), "BL")
    rows, tags = [], []
    for i, j, k in permutations(range(n), 3):
        r = np.zeros(n)
        r[k] += 1.0
        r[i] += 1.0 / d[i, j]
        r[j] -= 1.0 / d[i, j]
        rows.append(r)
        tags.append(("bl-triple", i, j, k, 1))
        rows.append(-r)
        tags.append(("bl-triple", i, j, k, -1))
    for i, k in permutations(range(n), 2):
        r = np.zeros(n)
        r[k] += 1.0 + 1.0 / d[i, k]
        r[i] -= 1.0 / d[i, k]
        rows.append(r)
        tags.append(("bl-pair", i, k, 1))
        rows.append(-r)
        tags.append(("bl-pair", i, k, -1))
    return Polytope(np.array(rows), np.ones(len(rows)), tuple(tags), "BL")
