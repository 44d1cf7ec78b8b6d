"""Finite metric spaces: point sets, distance matrices and their validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Hashable, Sequence

import numpy as np

from .errors import MetricError

FEAS_TOL = 1e-12
# The O(n^3) triangle scan is skipped by default above this size.
TRIANGLE_CHECK_LIMIT = 2000


@dataclass(frozen=True)
class Violation:
    kind: str  # "shape" | "nonfinite" | "diagonal" | "asymmetric" | "nonpositive" | "triangle"
    indices: tuple[int, ...]
    detail: str

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "indices": list(self.indices), "detail": self.detail}


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"ok": self.ok}
        if not self.ok:
            out["violations"] = [v.to_dict() for v in self.violations]
        return out


def validate_metric(d, tol: float = FEAS_TOL, check_triangle: bool = True) -> ValidationReport:
    """Check that ``d`` is a metric on distinct points.

    Never raises. Indices in the report are 0-based; a triangle violation
    ``(i, j, k)`` means ``d[i, k] > d[i, j] + d[j, k]`` and is listed once
    with ``i < k``.
    """
    try:
        d = np.asarray(d, dtype=float)
    except (TypeError, ValueError) as exc:
        return ValidationReport(False, (Violation("shape", (), f"not a numeric matrix: {exc}"),))
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        return ValidationReport(False, (Violation("shape", (), f"expected a square matrix, got shape {d.shape}"),))
    n = d.shape[0]
    out: list[Violation] = []

    bad = np.argwhere(~np.isfinite(d))
    for i, j in bad:
        out.append(Violation("nonfinite", (int(i), int(j)), f"d[{i},{j}] = {float(d[i, j])}"))
    if out:
        return ValidationReport(False, tuple(out))

    for i in range(n):
        if abs(d[i, i]) > tol:
            out.append(Violation("diagonal", (i,), f"d[{i},{i}] = {float(d[i, i])!r} != 0"))
    iu, ju = np.triu_indices(n, 1)
    for i, j in zip(iu, ju):
        i, j = int(i), int(j)
        if abs(d[i, j] - d[j, i]) > tol:
            out.append(Violation("asymmetric", (i, j), f"d[{i},{j}] = {float(d[i, j])!r} != d[{j},{i}] = {float(d[j, i])!r}"))
    for i in range(n):
        for j in range(n):
            if i != j and d[i, j] <= tol:
                out.append(Violation("nonpositive", (i, j), f"d[{i},{j}] = {float(d[i, j])!r} (points must be distinct)"))

    if check_triangle and n >= 3:
        for j in range(n):
            # excess[i, k] = d[i, k] - d[i, j] - d[j, k]
            excess = d - d[:, j][:, None] - d[j, :][None, :]
            for i, k in np.argwhere(excess > tol):
                i, k = int(i), int(k)
                if i < k and j != i and j != k:
                    out.append(Violation(
                        "triangle", (i, j, k),
                        f"d[{i},{k}] = {float(d[i, k])!r} > d[{i},{j}] + d[{j},{k}] = {float(d[i, j] + d[j, k])!r}",
                    ))
    return ValidationReport(not out, tuple(out))


class DistanceMatrix:
    """Validated, read-only n x n metric on distinct points."""

    __slots__ = ("_d",)

    def __init__(self, d, *, check_triangle: bool | None = None):
        arr = np.array(d, dtype=float)
        if arr.ndim == 0 or arr.size == 0:
            raise MetricError("a distance matrix needs at least one point")
        if check_triangle is None:
            check_triangle = arr.shape[0] <= TRIANGLE_CHECK_LIMIT
        report = validate_metric(arr, check_triangle=check_triangle)
        if not report.ok:
            first = report.violations[0]
            raise MetricError(f"invalid metric: {first.detail} ({len(report.violations)} violation(s))", report)
        # symmetrize exactly and zero the diagonal
        arr = 0.5 * (arr + arr.T)
        np.fill_diagonal(arr, 0.0)
        arr.flags.writeable = False
        self._d = arr

    @property
    def n(self) -> int:
        return self._d.shape[0]

    @property
    def d(self) -> np.ndarray:
        return self._d

    def __getitem__(self, key):
        return self._d[key]

    def __array__(self, dtype=None, copy=None):
        return self._d if dtype is None else self._d.astype(dtype)

    def submatrix(self, idx: Sequence[int]) -> "DistanceMatrix":
        idx = np.asarray(idx, dtype=int)
        sub = DistanceMatrix.__new__(DistanceMatrix)
        arr = self._d[np.ix_(idx, idx)].copy()
        arr.flags.writeable = False
        sub._d = arr
        return sub

    def __repr__(self) -> str:
        return f"DistanceMatrix(n={self.n})"


@dataclass(frozen=True, eq=False)
class PointSet:
    labels: tuple[Hashable, ...]
    coords: np.ndarray | None = None

    def __post_init__(self):
        labels = tuple(self.labels)
        if len(set(labels)) != len(labels):
            raise MetricError("point labels must be pairwise distinct")
        object.__setattr__(self, "labels", labels)
        if self.coords is not None:
            c = np.array(self.coords, dtype=float)
            if c.ndim == 1:
                c = c[:, None]
            if c.ndim != 2 or c.shape[0] != len(labels):
                raise MetricError(f"expected {len(labels)} coordinate vectors, got array of shape {c.shape}")
            if not np.all(np.isfinite(c)):
                raise MetricError("coordinates must be finite")
            c.flags.writeable = False
            object.__setattr__(self, "coords", c)

    def __len__(self) -> int:
        return len(self.labels)


def euclidean_matrix(points: PointSet) -> DistanceMatrix:
    if points.coords is None:
        raise MetricError("euclidean metric requires coordinates")
    c = points.coords
    diff = c[:, None, :] - c[None, :, :]
    d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    n = len(points)
    off = ~np.eye(n, dtype=bool)
    if np.any(d[off] == 0.0):
        i, j = np.argwhere((d == 0.0) & off)[0]
        raise MetricError(
            f"points {points.labels[i]!r} and {points.labels[j]!r} coincide; merge coincident atoms first")
    return DistanceMatrix(d)


def truncated_distance(x):
    """``min(2, x)``; the metric ``2 ∧ d`` underlying the flat norm of two Diracs."""
    return np.minimum(2.0, x) if isinstance(x, np.ndarray) else min(2.0, float(x))


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """A point set together with the metric on it."""

    points: PointSet
    metric: DistanceMatrix
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        if self.metric.n != len(self.points):
            raise MetricError(f"metric has {self.metric.n} points, point set has {len(self.points)}")
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(self.points.labels)})

    @classmethod
    def euclidean(cls, coords, labels=None) -> "FiniteMetricSpace":
        c = np.array(coords, dtype=float)
        if c.ndim == 1:
            c = c[:, None]
        if labels is None:
            labels = tuple(range(c.shape[0]))
        pts = PointSet(tuple(labels), c)
        return cls(pts, euclidean_matrix(pts))

    @classmethod
    def from_matrix(cls, d, labels=None) -> "FiniteMetricSpace":
        dm = d if isinstance(d, DistanceMatrix) else DistanceMatrix(d)
        if labels is None:
            labels = tuple(range(dm.n))
        return cls(PointSet(tuple(labels)), dm)

    @classmethod
    def from_json(cls, obj: dict) -> "FiniteMetricSpace":
        pts = obj.get("points", {})
        coords = pts.get("coords")
        labels = pts.get("labels")
        metric = obj.get("metric", {"type": "euclidean"})
        kind = metric.get("type")
        if kind == "euclidean":
            if coords is None:
                raise MetricError("euclidean metric requires points.coords")
            return cls.euclidean(coords, labels)
        if kind == "matrix":
            d = metric.get("d")
            if d is None:
                raise MetricError("matrix metric requires metric.d")
            dm = DistanceMatrix(d)
            if labels is None:
                labels = tuple(range(dm.n))
            return cls(PointSet(tuple(labels), coords), dm)
        raise MetricError(f"unknown metric type {kind!r}")

    def to_json(self) -> dict:
        pts: dict[str, Any] = {"labels": list(self.points.labels)}
        if self.points.coords is not None:
            pts["coords"] = self.points.coords.tolist()
        return {"points": pts, "metric": {"type": "matrix", "d": self.metric.d.tolist()}}

    def __len__(self) -> int:
        return len(self.points)

    @property
    def d(self) -> np.ndarray:
        return self.metric.d

    @property
    def line_coords(self) -> np.ndarray:
        """Coordinates of a 1-D space; needed whenever densities are involved."""
        c = self.points.coords
        if c is None or c.shape[1] != 1:
            raise MetricError("operation requires points on the real line (1-D coords)")
        return c[:, 0]

    def index(self, point) -> int:
        """Resolve an int index or a label to an index."""
        if isinstance(point, (int, np.integer)) and not isinstance(point, bool):
            i = int(point)
            if not 0 <= i < len(self):
                raise MetricError(f"point index {i} out of range for {len(self)} points")
            return i
        try:
            return self._index[point]
        except (KeyError, TypeError):
            raise MetricError(f"unknown point label {point!r}") from None

    def compatible(self, other: "FiniteMetricSpace") -> bool:
        if other is self:
            return True
        return (self.points.labels == other.points.labels
                and self.d.shape == other.d.shape and np.array_equal(self.d, other.d))
