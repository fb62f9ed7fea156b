"""Numerical solvers on asymptotically hyperbolic model manifolds with an
inner boundary: scalar-curvature prescription, the Lichnerowicz equation
with apparent-horizon boundary conditions, and radial TT-tensor
construction, all reduced under symmetry to one-dimensional boundary-value
problems."""

from .errors import (
    AhcurvError,
    BarrierError,
    BracketError,
    CoarseGridError,
    CounterexampleRegimeError,
    IterationLimitError,
)
from .geometry import (
    GeometryKind,
    RadialGeometry,
    conformal_mean_curvature,
    conformal_scalar_curvature,
    geometry_from_json,
    geometry_to_json,
    kappa,
    make_custom,
    make_hyperbolic_exterior,
    make_toric_collar,
)
from .grid import DecayFit, GridFunction, fit_decay_rate, weighted_sup_norm

__all__ = [
    "AhcurvError",
    "BarrierError",
    "BracketError",
    "CoarseGridError",
    "CounterexampleRegimeError",
    "IterationLimitError",
    "GeometryKind",
    "RadialGeometry",
    "GridFunction",
    "DecayFit",
    "kappa",
    "make_hyperbolic_exterior",
    "make_toric_collar",
    "make_custom",
    "conformal_scalar_curvature",
    "conformal_mean_curvature",
    "geometry_to_json",
    "geometry_from_json",
    "weighted_sup_norm",
    "fit_decay_rate",
]

__version__ = "0.1.0"
