"""Fortet-Mourier and dual bounded-Lipschitz distances for measures with a molecular side."""

from .closed_form import fm_dirac_vs_probability, fm_two_weighted_diracs, fm_weighted_dirac_vs_positive, theta0
from .convex_engine import (
    DiscretizationPlan,
    fm_distance_molecular_to_density,
    fm_distance_molecular_to_molecular,
)
from .envelope import h_theta, psi
from .errors import (
    ConvergenceError,
    FlatDistError,
    MeasureError,
    MetricError,
    NotProbabilityError,
    NumericalError,
    OracleError,
    QuadratureError,
)
from .lp import bl_norm_molecular, fm_norm_molecular, fm_norm_molecular_reduced, solve_lp
from .measures import (
    DensityMeasure1D,
    MolecularMeasure,
    ball_mass,
    jordan_decompose,
    mass_radius,
    molecular_on_line,
    total_variation,
)
from .metric import DistanceMatrix, FiniteMetricSpace, PointSet, validate_metric
from .polytope import Polytope, bl_ball_polytope, fm_ball_polytope
from .results import NormResult

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "DensityMeasure1D",
    "DiscretizationPlan",
    "DistanceMatrix",
    "FiniteMetricSpace",
    "FlatDistError",
    "MeasureError",
    "MetricError",
    "MolecularMeasure",
    "NormResult",
    "NotProbabilityError",
    "NumericalError",
    "OracleError",
    "PointSet",
    "Polytope",
    "QuadratureError",
    "ball_mass",
    "bl_ball_polytope",
    "bl_norm_molecular",
    "fm_ball_polytope",
    "fm_dirac_vs_probability",
    "fm_distance_molecular_to_density",
    "fm_distance_molecular_to_molecular",
    "fm_norm_molecular",
    "fm_norm_molecular_reduced",
    "fm_two_weighted_diracs",
    "fm_weighted_dirac_vs_positive",
    "h_theta",
    "jordan_decompose",
    "mass_radius",
    "molecular_on_line",
    "psi",
    "solve_lp",
    "theta0",
    "total_variation",
    "validate_metric",
]
