"""Numerical verification of weighted Hardy and Rellich inequalities on convex-set complements."""

__version__ = "0.1.0"

from .weights import WeightParams
from .geometry import (
    SinglePoint,
    AffineSubspace,
    Halfspace,
    HPolytope,
    VPolytope,
    Ball,
    Box,
    GeometryReport,
    body_from_json,
)
from .constants import ProblemSpec, constants_report
from .profiles import Profile1D
from .trials import RadialDistanceTrial, PowerLocalizedTrial, ProductTrial
from .functionals import QuadratureSpec, hardy_quotient, rellich_quotient
from .optimizer import bracket_mu, bracket_nu, sequence_sweep
