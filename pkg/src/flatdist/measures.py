"""Molecular (finitely supported) signed measures and 1-D density measures."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Union

import numpy as np

from .errors import MeasureError
from .metric import FiniteMetricSpace
from .quadrature import QuadConfig, quad, quad_pieces

# Absolute tolerance for "this is a probability measure".
PROBABILITY_TOL = 1e-9
MASS_RADIUS_TOL = 1e-10


class MolecularMeasure:
    """Signed finite sum of weighted Diracs on the points of a :class:`FiniteMetricSpace`.

    Atoms are stored sorted by point index, with distinct indices and nonzero
    weights. The zero measure has no atoms.
    """

    __slots__ = ("space", "indices", "weights")

    def __init__(self, space: FiniteMetricSpace, indices, weights):
        idx = np.asarray(indices, dtype=int).reshape(-1)
        w = np.asarray(weights, dtype=float).reshape(-1)
        if idx.shape != w.shape:
            raise MeasureError(f"{idx.size} support indices but {w.size} weights")
        if idx.size and (idx.min() < 0 or idx.max() >= len(space)):
            raise MeasureError("support index out of range")
        if np.unique(idx).size != idx.size:
            raise MeasureError("repeated support index; use merge_and_normalize")
        if not np.all(np.isfinite(w)):
            raise MeasureError("weights must be finite")
        if np.any(w == 0.0):
            raise MeasureError("zero weights must be dropped; use merge_and_normalize")
        order = np.argsort(idx, kind="stable")
        idx, w = idx[order], w[order]
        idx.flags.writeable = False
        w.flags.writeable = False
        self.space = space
        self.indices = idx
        self.weights = w

    @classmethod
    def zero(cls, space: FiniteMetricSpace) -> "MolecularMeasure":
        return cls(space, [], [])

    @classmethod
    def dirac(cls, space: FiniteMetricSpace, point, weight: float = 1.0) -> "MolecularMeasure":
        return merge_and_normalize(space, [point], [weight])

    def __len__(self) -> int:
        return self.indices.size

    def __repr__(self) -> str:
        labels = self.space.points.labels
        atoms = ", ".join(f"{w:g}·δ[{labels[i]!r}]" for i, w in zip(self.indices, self.weights))
        return f"MolecularMeasure({atoms or '0'})"

    @property
    def is_zero(self) -> bool:
        return self.indices.size == 0

    @property
    def is_positive(self) -> bool:
        return bool(np.all(self.weights > 0))

    @property
    def total_mass(self) -> float:
        return math.fsum(self.weights)

    @property
    def coords(self) -> np.ndarray:
        return self.space.line_coords[self.indices]

    def distances_from(self, point) -> np.ndarray:
        return self.space.d[self.space.index(point), self.indices]

    def as_dense(self) -> np.ndarray:
        out = np.zeros(len(self.space))
        out[self.indices] = self.weights
        return out

    def _check_space(self, other: "MolecularMeasure"):
        if not self.space.compatible(other.space):
            raise MeasureError("measures live on different spaces")

    def __add__(self, other):
        if not isinstance(other, MolecularMeasure):
            return NotImplemented
        self._check_space(other)
        return merge_and_normalize(self.space, np.concatenate([self.indices, other.indices]),
                                   np.concatenate([self.weights, other.weights]))

    def __neg__(self):
        return MolecularMeasure(self.space, self.indices, -self.weights)

    def __sub__(self, other):
        if not isinstance(other, MolecularMeasure):
            return NotImplemented
        return self + (-other)

    def __mul__(self, c):
        c = float(c)
        if c == 0.0:
            return MolecularMeasure.zero(self.space)
        return MolecularMeasure(self.space, self.indices, c * self.weights)

    __rmul__ = __mul__


def merge_and_normalize(space: FiniteMetricSpace, points: Iterable, weights: Iterable) -> MolecularMeasure:
    """Build a measure from possibly repeated atoms: sum coincident weights, drop zeros."""
    points = list(points)
    weights = [float(w) for w in weights]
    if len(points) != len(weights):
        raise MeasureError(f"{len(points)} points but {len(weights)} weights")
    acc: dict[int, list[float]] = {}
    for p, w in zip(points, weights):
        acc.setdefault(space.index(p), []).append(w)
    idx, w = [], []
    for i in sorted(acc):
        s = math.fsum(acc[i])
        if s != 0.0:
            idx.append(i)
            w.append(s)
    return MolecularMeasure(space, idx, w)


def molecular_on_line(coords, weights, labels=None) -> MolecularMeasure:
    """Molecular measure on the real line; atoms at equal coordinates are merged."""
    coords = np.asarray(coords, dtype=float).reshape(-1)
    uniq = np.unique(coords)
    if labels is None:
        space = FiniteMetricSpace.euclidean(uniq)
    else:
        first = {}
        for c, lab in zip(coords, labels):
            first.setdefault(float(c), lab)
        space = FiniteMetricSpace.euclidean(uniq, [first[float(c)] for c in uniq])
    pos = np.searchsorted(uniq, coords)
    return merge_and_normalize(space, pos.tolist(), weights)


def molecular_from_json(obj: dict, space: FiniteMetricSpace | None = None) -> MolecularMeasure:
    """Parse ``{"atoms": [{"point": p, "weight": w}, ...], "space": {...}?}``.

    An embedded ``"space"`` takes precedence over the ``space`` argument.
    """
    if not isinstance(obj, dict) or not isinstance(obj.get("atoms"), list):
        raise MeasureError("molecular measure JSON needs an \"atoms\" list")
    if "space" in obj:
        space = FiniteMetricSpace.from_json(obj["space"])
    if space is None:
        raise MeasureError("no metric space given for the molecular measure")
    points, weights = [], []
    for atom in obj["atoms"]:
        if not isinstance(atom, dict) or "point" not in atom or "weight" not in atom:
            raise MeasureError(f"malformed atom {atom!r}")
        try:
            space.index(atom["point"])
        except (KeyError, IndexError, ValueError):
            raise MeasureError(f"unknown point {atom['point']!r}") from None
        points.append(atom["point"])
        weights.append(atom["weight"])
    return merge_and_normalize(space, points, weights)


def molecular_to_json(tau: MolecularMeasure, include_space: bool = True) -> dict:
    labels = tau.space.points.labels
    out: dict = {"atoms": [{"point": labels[i], "weight": float(w)} for i, w in zip(tau.indices, tau.weights)]}
    if include_space:
        out["space"] = tau.space.to_json()
    return out


@dataclass(frozen=True)
class JordanPair:
    positive: MolecularMeasure
    negative: MolecularMeasure


def jordan_decompose(tau: MolecularMeasure) -> JordanPair:
    pos = tau.weights > 0
    return JordanPair(
        MolecularMeasure(tau.space, tau.indices[pos], tau.weights[pos]),
        MolecularMeasure(tau.space, tau.indices[~pos], -tau.weights[~pos]),
    )


def total_variation(tau: MolecularMeasure) -> float:
    return math.fsum(np.abs(tau.weights))


def _vectorize(f: Callable) -> Callable[[np.ndarray], np.ndarray]:
    """Return a callable that evaluates ``f`` elementwise on arrays."""
    probe = np.array([[0.25, 0.5], [0.75, 1.0]])
    try:
        out = np.asarray(f(probe), dtype=float)
        if out.shape == probe.shape:
            return lambda y: np.asarray(f(np.asarray(y, dtype=float)), dtype=float)
    except Exception:  # noqa: BLE001 - scalar-only callables fall through
        pass
    vf = np.vectorize(lambda t: float(f(float(t))), otypes=[float])
    return vf


class DensityMeasure1D:
    """Positive measure ``density(y) dy`` on an interval ``[a, b]``, ``b`` possibly ``inf``.

    ``density`` must be reentrant; it is called with scalars by the adaptive
    quadrature and with arrays wherever it accepts them.
    """

    def __init__(self, density: Callable, domain, total_mass: float | None = None,
                 quad_config: QuadConfig | None = None, name: str = "density", validate: bool = True):
        a, b = (float(domain[0]), float(domain[1]))
        if not math.isfinite(a):
            raise MeasureError("domain left endpoint must be finite")
        if not b > a:
            raise MeasureError(f"empty domain [{a}, {b}]")
        self.a, self.b = a, b
        self.density = density
        self.name = name
        self.quad = quad_config or QuadConfig()
        self._pdf = _vectorize(density)
        self._supplied_mass = None if total_mass is None else float(total_mass)
        self._total = None
        if validate:
            self._validate()

    def __repr__(self) -> str:
        return f"DensityMeasure1D({self.name}, domain=[{self.a}, {self.b}])"

    def _sample_points(self, k: int = 1025) -> np.ndarray:
        if math.isfinite(self.b):
            return np.linspace(self.a, self.b, k)
        t = np.linspace(0.0, 1.0, k, endpoint=False)
        return self.a + 64.0 * t / (1.0 - t)

    def _validate(self):
        vals = self.pdf(self._sample_points())
        if not np.all(np.isfinite(vals)):
            raise MeasureError("density is not finite on the domain")
        if np.any(vals < 0):
            raise MeasureError("density takes negative values on the domain")
        if self._supplied_mass is not None:
            if self._supplied_mass < 0:
                raise MeasureError("total mass must be nonnegative")
            computed = quad(self.density, self.a, self.b, self.quad)
            if abs(computed - self._supplied_mass) > self.quad.abs_tol:
                raise MeasureError(
                    f"supplied total mass {self._supplied_mass!r} disagrees with quadrature {computed!r}")

    def pdf(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        out = self._pdf(y)
        return np.where((y >= self.a) & (y <= self.b), out, 0.0)

    @property
    def total_mass(self) -> float:
        if self._supplied_mass is not None:
            return self._supplied_mass
        if self._total is None:
            self._total = quad(self.density, self.a, self.b, self.quad)
        return self._total

    def mass(self, lo: float, hi: float) -> float:
        """Mass of ``(lo, hi)`` intersected with the domain."""
        lo, hi = max(lo, self.a), min(hi, self.b)
        if hi <= lo:
            return 0.0
        return quad(self.density, lo, hi, self.quad)

    def tail_mass(self, r: float) -> float:
        """Mass of ``(r, b)``; from the supplied total when available."""
        if r <= self.a:
            return self.total_mass
        if r >= self.b:
            return 0.0
        if self._supplied_mass is not None:
            return max(0.0, self._supplied_mass - self.mass(self.a, r))
        return self.mass(r, self.b)

    def integrate(self, g: Callable[[float], float], breakpoints=(), tail_from: float | None = None,
                  tail_value: float | None = None) -> float:
        """``∫ g dμ`` splitting at ``breakpoints``.

        When ``g`` is constant ``tail_value`` on ``(tail_from, b)`` the tail is
        taken as ``tail_value * tail_mass(tail_from)`` instead of integrated.
        """
        hi = self.b
        tail = 0.0
        if tail_from is not None and tail_from < self.b:
            hi = max(self.a, tail_from)
            tail = tail_value * self.tail_mass(hi)
        pts = [self.a, hi] + [p for p in breakpoints if self.a < p < hi]
        body = quad_pieces(lambda y: g(y) * self.density(y), pts, self.quad)
        return body + tail


Measure = Union[MolecularMeasure, DensityMeasure1D]


# --- density families (CLI subset) -------------------------------------------------

def gaussian_density(domain, mean: float = 0.0, scale: float = 1.0, weight: float = 1.0,
                     total_mass: float | None = None, quad_config: QuadConfig | None = None) -> DensityMeasure1D:
    """Unnormalized ``weight * exp(-((y - mean) / scale)^2)``."""
    if not scale > 0:
        raise MeasureError("gaussian scale must be positive")
    f = lambda y: weight * np.exp(-((np.asarray(y) - mean) / scale) ** 2)  # noqa: E731
    return DensityMeasure1D(f, domain, total_mass, quad_config, name="gaussian")


def exponential_density(domain, rate: float = 1.0, weight: float = 1.0, origin: float | None = None,
                        total_mass: float | None = None, quad_config: QuadConfig | None = None) -> DensityMeasure1D:
    """``weight * rate * exp(-rate (y - origin))``, origin defaulting to the left endpoint."""
    if not rate > 0:
        raise MeasureError("exponential rate must be positive")
    x0 = float(domain[0]) if origin is None else float(origin)
    f = lambda y: weight * rate * np.exp(-rate * (np.asarray(y) - x0))  # noqa: E731
    return DensityMeasure1D(f, domain, total_mass, quad_config, name="exponential")


def uniform_density(domain, height: float | None = None, total_mass: float | None = None,
                    quad_config: QuadConfig | None = None) -> DensityMeasure1D:
    """Constant density; by default the uniform probability measure on a bounded domain."""
    a, b = float(domain[0]), float(domain[1])
    if height is None:
        if not math.isfinite(b):
            raise MeasureError("uniform density on an unbounded domain needs an explicit height")
        height = 1.0 / (b - a)
    h = float(height)
    f = lambda y: np.full(np.shape(y), h) if np.ndim(y) else h  # noqa: E731
    return DensityMeasure1D(f, (a, b), total_mass, quad_config, name="uniform")


def polynomial_density(domain, coefficients, total_mass: float | None = None,
                       quad_config: QuadConfig | None = None) -> DensityMeasure1D:
    """``sum_k c_k y^k`` on a bounded domain; must be nonnegative there."""
    if not math.isfinite(float(domain[1])):
        raise MeasureError("polynomial densities need a bounded domain")
    poly = np.polynomial.Polynomial(np.asarray(coefficients, dtype=float))
    return DensityMeasure1D(poly, domain, total_mass, quad_config, name="polynomial")


def density_from_json(obj: dict, quad_config: QuadConfig | None = None) -> DensityMeasure1D:
    family = obj.get("family")
    params = dict(obj.get("params", {}))
    dom = obj.get("domain")
    if not isinstance(dom, (list, tuple)) or len(dom) != 2:
        raise MeasureError("density domain must be [a, b] with b a number or \"inf\"")
    b = math.inf if dom[1] in ("inf", "Infinity", None) else float(dom[1])
    domain = (float(dom[0]), b)
    total = obj.get("total_mass")
    makers = {
        "gaussian": gaussian_density,
        "exponential": exponential_density,
        "uniform": uniform_density,
        "polynomial": polynomial_density,
    }
    if family not in makers:
        raise MeasureError(f"unknown density family {family!r}")
    try:
        return makers[family](domain, total_mass=total, quad_config=quad_config, **params)
    except TypeError as exc:
        raise MeasureError(f"bad parameters for {family} density: {exc}") from None


# --- mass queries ---------------------------------------------------------------------

def _require_positive(mu):
    if isinstance(mu, MolecularMeasure) and not mu.is_positive:
        raise MeasureError("operation requires a positive measure")


def ball_mass(mu: Measure, x, r: float) -> float:
    """Mass of the open ball ``{y : d(x, y) < r}``.

    ``x`` is a point (index or label) of ``mu.space`` for molecular ``mu`` and
    a real coordinate for a density.
    """
    if r < 0:
        raise MeasureError(f"radius must be nonnegative, got {r}")
    _require_positive(mu)
    if isinstance(mu, MolecularMeasure):
        if mu.is_zero:
            return 0.0
        dist = mu.distances_from(x)
        return math.fsum(mu.weights[dist < r])
    x = float(x)
    return mu.mass(x - r, x + r)


def mass_radius(mu: Measure, x, m: float) -> float:
    """``inf{r >= 0 : mu(B(x, r)) >= m}`` with ``inf ∅ = +inf``.

    For densities the ball mass is only known to the quadrature tolerance, so
    the threshold is relaxed by that tolerance and the result is located by
    bisection to ``MASS_RADIUS_TOL``.
    """
    if not m > 0:
        raise MeasureError(f"mass threshold must be positive, got {m}")
    _require_positive(mu)
    if isinstance(mu, MolecularMeasure):
        if mu.is_zero:
            return math.inf
        dist = mu.distances_from(x)
        order = np.argsort(dist, kind="stable")
        ds, ws = dist[order], mu.weights[order]
        radii, starts = np.unique(ds, return_index=True)
        # cumulative weight of atoms at distance <= radii[k]
        ends = np.append(starts[1:], ds.size)
        cum = np.cumsum(ws)[ends - 1]
        hit = np.nonzero(cum >= m)[0]
        return float(radii[hit[0]]) if hit.size else math.inf

    x = float(x)
    slack = mu.quad.abs_tol
    if mu.total_mass < m - slack:
        return math.inf
    target = m - slack
    if math.isfinite(mu.b):
        hi = max(abs(x - mu.a), abs(x - mu.b)) + MASS_RADIUS_TOL
    else:
        hi = max(1.0, abs(x - mu.a))
        while mu.mass(x - hi, x + hi) < target:
            hi *= 2.0
            if hi > 1e18:
                return math.inf
    lo = 0.0
    if mu.mass(x - hi, x + hi) < target:
        return math.inf
    while hi - lo > MASS_RADIUS_TOL:
        mid = 0.5 * (lo + hi)
        if mu.mass(x - mid, x + mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi
