"""FM distance between a positive molecular measure and a positive 1-D density.

The density is replaced by atoms at cell centers on a window around the
support of ``ν``; the resulting finite problem is the reduced epigraph LP.
Outside the window every envelope ``h_θ`` equals ``-1``, so the mass there
enters the objective exactly as a constant. Cells are halved until the LP
values settle and the transport certificate is below tolerance; the value
reported is ``ψ`` at the final ``θ`` computed by adaptive quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .envelope import envelope_values, psi
from .errors import ConvergenceError, MeasureError
from .lp import fm_norm_molecular_reduced, solve_reduced
from .measures import DensityMeasure1D, MolecularMeasure, total_variation
from .quadrature import GL_NODES, GL_WEIGHTS, cell_integrals
from .results import NormResult

MAX_HALVINGS = 20
# Upper limit on (atoms of ν) x (cells); beyond it the LP no longer fits in memory comfortably.
MAX_LP_ENTRIES = 40_000_000
# share of tol the cutting-plane LP may leave open; it is added to the certificate
LP_GAP_FRACTION = 0.01
RULES = ("midpoint", "gauss")


@dataclass(frozen=True)
class DiscretizationPlan:
    """Molecular stand-in ``μ_h`` for the window part of a density.

    ``error_bound`` certifies ``||μ - (μ_h + outside mass)||_FM`` against
    test functions that equal ``-1`` outside the window.
    """

    cell_width: float
    window: tuple[float, float]
    rule: str
    atoms: np.ndarray
    weights: np.ndarray
    outside_mass: float
    mass_discrepancy: float
    quad_tolerance: float

    @property
    def n_cells(self) -> int:
        return int(round((self.window[1] - self.window[0]) / self.cell_width)) if self.cell_width else 0

    @property
    def transport_bound(self) -> float:
        # midpoint atoms sit at most h/2 from any point of their cell; Gauss nodes at most h
        factor = 0.5 if self.rule == "midpoint" else 1.0
        return factor * self.cell_width * float(self.weights.sum())

    @property
    def error_bound(self) -> float:
        return self.transport_bound + self.mass_discrepancy + self.quad_tolerance


def window_for(nu: MolecularMeasure, mu: DensityMeasure1D) -> tuple[float, float]:
    """Part of the domain within distance 2 of the support of ``ν``."""
    x = nu.space.line_coords[nu.indices]
    return max(mu.a, float(x.min()) - 2.0), min(mu.b, float(x.max()) + 2.0)


def discretize(mu: DensityMeasure1D, window: tuple[float, float], n_cells: int,
               rule: str = "midpoint") -> DiscretizationPlan:
    if rule not in RULES:
        raise ValueError(f"rule must be one of {RULES}, got {rule!r}")
    lo, hi = window
    tol = mu.quad.abs_tol
    outside = mu.total_mass - mu.mass(lo, hi) if hi > lo else mu.total_mass
    if hi <= lo or n_cells == 0:
        return DiscretizationPlan(0.0, (lo, lo), rule, np.zeros(0), np.zeros(0),
                                  max(0.0, outside), 0.0, 2 * tol)
    window_mass = mu.total_mass - outside
    edges = np.linspace(lo, hi, n_cells + 1)
    width = (hi - lo) / n_cells
    if rule == "midpoint":
        atoms = 0.5 * (edges[:-1] + edges[1:])
        weights = cell_integrals(mu.pdf, edges)
    else:
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * np.diff(edges)
        atoms = (mid[:, None] + half[:, None] * GL_NODES[None, :]).ravel()
        weights = (half[:, None] * GL_WEIGHTS[None, :] * mu.pdf(atoms.reshape(-1, GL_NODES.size))).ravel()
    keep = weights > 0
    atoms, weights = atoms[keep], weights[keep]
    discrepancy = abs(float(np.sum(weights)) - window_mass)
    # mass(), total_mass and the tail each carry one quadrature tolerance
    return DiscretizationPlan(width, (lo, hi), rule, atoms, weights, max(0.0, outside), discrepancy, 3 * tol)


def _initial_cells(plan_factor: float, window: tuple[float, float], mass: float, tol: float) -> int:
    # the first transport bound is 0.9 tol, so one halving brings the whole certificate under tol/2
    length = window[1] - window[0]
    if length <= 0 or mass <= 0:
        return 0
    return max(4, int(math.ceil(plan_factor * length * mass / (0.9 * tol))))


def fm_distance_molecular_to_density(nu: MolecularMeasure, mu: DensityMeasure1D, tol: float = 1e-6,
                                     rule: str = "midpoint", max_halvings: int = MAX_HALVINGS,
                                     solver: str = "auto") -> NormResult:
    """``||ν - μ||_FM`` with a certified gap at most ``tol``.

    ``ν`` must live on a 1-D Euclidean space; ``maximizer`` and ``theta`` are
    the optimal envelope levels at the atoms of ``ν``. ``history`` records
    one dict per discretization level.
    """
    if not isinstance(nu, MolecularMeasure) or not isinstance(mu, DensityMeasure1D):
        raise TypeError("expected a MolecularMeasure and a DensityMeasure1D")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if nu.is_zero:
        raise MeasureError("ν must be a nonzero positive measure")
    if not nu.is_positive:
        raise MeasureError("ν must be a positive measure")
    if rule not in RULES:
        raise ValueError(f"rule must be one of {RULES}, got {rule!r}")

    x = nu.space.line_coords[nu.indices]
    alpha = nu.weights
    window = window_for(nu, mu)
    factor = 0.5 if rule == "midpoint" else 1.0
    window_mass = mu.mass(*window) if window[1] > window[0] else 0.0
    n_cells = _initial_cells(factor, window, window_mass, tol)

    history = []
    prev = None
    for level in range(max_halvings + 1):
        if n_cells * (GL_NODES.size if rule == "gauss" else 1) * x.size > MAX_LP_ENTRIES:
            raise ConvergenceError(f"tolerance {tol} needs more than {MAX_LP_ENTRIES} LP entries")
        plan = discretize(mu, window, n_cells, rule)
        dist = np.abs(x[:, None] - plan.atoms[None, :])
        sol = solve_reduced(alpha, plan.weights, dist, solver, gap_tol=LP_GAP_FRACTION * tol)
        lp_value = sol.value + plan.outside_mass  # h = -1 outside the window
        theta = envelope_values(sol.theta, np.abs(x[:, None] - x[None, :]))
        eb = plan.error_bound + (sol.upper_bound - sol.value)
        record = {"cell_width": plan.cell_width, "cells": n_cells, "lp_value": lp_value,
                  "error_bound": eb, "solver": sol.method, "iterations": sol.iterations}
        history.append(record)
        settled = prev is not None and abs(lp_value - prev) < tol / 2
        if (settled or n_cells == 0) and eb < tol / 2:
            direct = psi([(1.0, nu), (-1.0, mu)], theta, nu.space, nu.indices)
            gap = max(0.0, lp_value + eb - direct)
            record["direct_value"] = direct
            record["gap"] = gap
            if gap <= tol:
                return NormResult(direct, theta.copy(), "discretize_lp", gap=gap,
                                  iterations=sum(h["iterations"] for h in history),
                                  theta=theta, refinements=level, history=tuple(history))
        prev = lp_value
        n_cells *= 2
    raise ConvergenceError(f"no certified value within {max_halvings} halvings (tol {tol})")


def fm_distance_molecular_to_molecular(nu: MolecularMeasure, mu: MolecularMeasure,
                                       solver: str = "auto") -> NormResult:
    """``||ν - μ||_FM`` for positive molecular measures on a shared space."""
    for name, m in (("ν", nu), ("μ", mu)):
        if not m.is_positive:
            raise MeasureError(f"{name} must be a positive measure")
    tau = nu - mu
    if tau.is_zero:
        return NormResult(0.0, np.zeros(0), "zero")
    if np.all(tau.weights > 0) or np.all(tau.weights < 0):
        sign = 1.0 if tau.weights[0] > 0 else -1.0
        return NormResult(total_variation(tau), np.full(len(tau), sign), "total_variation")
    return fm_norm_molecular_reduced(tau, solver)
