"""Symmetry-reduced model manifolds and conformal-transformation formulas.

A RadialGeometry is a warped-product manifold  g = dt^2 + q(t)^2 h  truncated
to t in [t0, T], with t the geodesic distance from the inner boundary.  Every
solver in this package consumes only the node arrays stored here:

  rho   defining function of the conformal boundary, decreasing, rho > 0,
  H_r   mean curvature of the level sets {t = const} w.r.t. d/dt,
        equal to (n-1) q'/q,
  scal  scalar curvature profile of g.

Two built-in models:

  hyperbolic exterior   exterior of a geodesic sphere in hyperbolic space,
                        q = sinh t, rho = e^{-t}, H_r = (n-1) coth t,
                        scal = -n(n-1);
  toric collar          T^{n-1} x (0, A] with g = y^{-2}(dy^2 + g_0),
                        parametrised by t = log(A/y), so rho = A e^{-t},
                        q ~ e^t, H_r = n-1, scal = -n(n-1).

Radial functions see the Laplacian as  Delta f = f'' + H_r f'.

Under a conformal rescaling ghat = phi^kappa g with kappa = 4/(n-2) the
scalar curvature becomes

  scalhat = phi^{-kappa-1} ( -(4(n-1)/(n-2)) Delta phi + scal * phi )

and the mean curvature of the inner boundary (N the unit normal pointing
into M, so grad_N phi = +phi'(t0)) becomes

  Hhat = phi^{-kappa/2} ( H + (2(n-1)/(n-2)) grad_N phi / phi ).
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GeometryKind",
    "RadialGeometry",
    "kappa",
    "make_hyperbolic_exterior",
    "make_toric_collar",
    "make_custom",
    "radial_laplacian",
    "conformal_radial_laplacian",
    "inner_normal_derivative",
    "conformal_scalar_curvature",
    "conformal_mean_curvature",
    "geometry_to_json",
    "geometry_from_json",
]


class GeometryKind(str, enum.Enum):
    HYPERBOLIC_EXTERIOR = "hyperbolic_exterior"
    TORIC_COLLAR = "toric_collar"
    CUSTOM = "custom"


def kappa(n: int) -> float:
    """Conformal exponent kappa = 4/(n-2)."""
    return 4.0 / (n - 2)


@dataclass(frozen=True)
class RadialGeometry:
    """Immutable node data of a symmetry-reduced asymptotically hyperbolic
    manifold with inner boundary at t[0] and outer truncation at t[-1].

    ``log_warp`` is log q up to an additive constant (only differences are
    ever used).  ``angular_scal`` is the scalar curvature of the unit-warp
    cross-section metric h, needed when curvatures of conformally rescaled
    metrics are rebuilt from the warped-product formulas.
    """

    n: int
    kind: GeometryKind
    t: np.ndarray
    rho: np.ndarray
    H_r: np.ndarray
    scal: np.ndarray
    log_warp: np.ndarray
    angular_scal: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"dimension n must be an integer >= 3, got {self.n}")
        arrays = {}
        for name in ("t", "rho", "H_r", "scal", "log_warp"):
            a = np.asarray(getattr(self, name), dtype=float)
            if a.ndim != 1 or a.size < 2:
                raise ValueError(f"{name} must be a 1-d array of at least 2 nodes")
            if not np.all(np.isfinite(a)):
                raise ValueError(f"{name} contains non-finite entries")
            arrays[name] = a
        sizes = {a.size for a in arrays.values()}
        if len(sizes) != 1:
            raise ValueError("node arrays must share a common length")
        t = arrays["t"]
        dt = np.diff(t)
        if np.any(dt <= 0):
            raise ValueError("t must be strictly increasing")
        h = dt[0]
        if np.max(np.abs(dt - h)) > 1e-9 * h:
            raise ValueError("t must be uniformly spaced")
        rho = arrays["rho"]
        if np.any(rho <= 0):
            raise ValueError("rho must be positive everywhere")
        if np.any(np.diff(rho) >= 0):
            raise ValueError("rho must be strictly decreasing")
        for name, a in arrays.items():
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def num_nodes(self) -> int:
        return self.t.size

    @property
    def spacing(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def H_inner(self) -> float:
        """Mean curvature of the inner boundary w.r.t. the normal into M."""
        return float(self.H_r[0])

    @property
    def warp_ratio(self) -> np.ndarray:
        """q'/q profile, recovered from H_r = (n-1) q'/q."""
        return self.H_r / (self.n - 1)

    @property
    def warp_second_ratio(self) -> np.ndarray:
        """q''/q profile.  Both built-in warps satisfy q'' = q exactly
        (sinh and exp); custom profiles fall back to differentiating
        q'/q, since q''/q = (q'/q)' + (q'/q)^2."""
        if self.kind in (GeometryKind.HYPERBOLIC_EXTERIOR, GeometryKind.TORIC_COLLAR):
            return np.ones(self.num_nodes)
        ratio = self.warp_ratio
        return first_derivative(self, ratio) + ratio**2


def make_hyperbolic_exterior(n: int, t0: float, T: float, num_nodes: int) -> RadialGeometry:
    """Exterior of a geodesic sphere of radius t0 in hyperbolic n-space,
    g = dt^2 + sinh^2(t) dOmega^2, truncated at t = T."""
    _check_grid_args(n, t0, T, num_nodes, require_t0_positive=True)
    t = np.linspace(t0, T, num_nodes)
    return RadialGeometry(
        n=n,
        kind=GeometryKind.HYPERBOLIC_EXTERIOR,
        t=t,
        rho=np.exp(-t),
        H_r=(n - 1) / np.tanh(t),
        scal=np.full(num_nodes, -float(n * (n - 1))),
        log_warp=np.log(np.sinh(t)),
        angular_scal=float((n - 1) * (n - 2)),
    )


def make_toric_collar(n: int, A: float, T: float, num_nodes: int) -> RadialGeometry:
    """Flat-torus collar T^{n-1} x (0, A], inner boundary the torus y = A
    (t = 0), with rho = A e^{-t} and constant mean curvature n-1."""
    if A <= 0:
        raise ValueError(f"A must be positive, got {A}")
    _check_grid_args(n, 0.0, T, num_nodes, require_t0_positive=False)
    t = np.linspace(0.0, T, num_nodes)
    return RadialGeometry(
        n=n,
        kind=GeometryKind.TORIC_COLLAR,
        t=t,
        rho=A * np.exp(-t),
        H_r=np.full(num_nodes, float(n - 1)),
        scal=np.full(num_nodes, -float(n * (n - 1))),
        log_warp=t.copy(),
        angular_scal=0.0,
    )


def make_custom(n, t, rho, H_r, scal, angular_scal=0.0, log_warp=None) -> RadialGeometry:
    """Escape hatch for profile data not covered by the built-in models.

    When ``log_warp`` is omitted it is recovered by integrating
    H_r/(n-1) with the trapezoid rule, which is second-order consistent
    with the grid machinery.
    """
    t = np.asarray(t, dtype=float)
    H_r = np.asarray(H_r, dtype=float)
    if log_warp is None:
        ratio = H_r / (n - 1)
        log_warp = np.concatenate(
            ([0.0], np.cumsum(0.5 * (ratio[1:] + ratio[:-1]) * np.diff(t)))
        )
    return RadialGeometry(
        n=n,
        kind=GeometryKind.CUSTOM,
        t=t,
        rho=np.asarray(rho, dtype=float),
        H_r=H_r,
        scal=np.asarray(scal, dtype=float),
        log_warp=np.asarray(log_warp, dtype=float),
        angular_scal=float(angular_scal),
    )


def _check_grid_args(n, t0, T, num_nodes, require_t0_positive):
    if int(n) != n or n < 3:
        raise ValueError(f"dimension n must be an integer >= 3, got {n}")
    if require_t0_positive and t0 <= 0:
        raise ValueError(f"t0 must be positive, got {t0}")
    if T <= t0:
        raise ValueError(f"outer truncation T={T} must exceed t0={t0}")
    if num_nodes < 16:
        raise ValueError(f"num_nodes must be at least 16, got {num_nodes}")


# --- differential operators on node arrays ---------------------------------

def first_derivative(geom: RadialGeometry, values: np.ndarray) -> np.ndarray:
    """d/dt by central differences, second-order one-sided at the ends."""
    v = np.asarray(values, dtype=float)
    h = geom.spacing
    d = np.empty_like(v)
    d[1:-1] = (v[2:] - v[:-2]) / (2 * h)
    d[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h)
    d[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * h)
    return d


def second_derivative(geom: RadialGeometry, values: np.ndarray) -> np.ndarray:
    """d^2/dt^2 by central differences; ends copy the neighbouring stencil."""
    v = np.asarray(values, dtype=float)
    h = geom.spacing
    d = np.empty_like(v)
    d[1:-1] = (v[2:] - 2 * v[1:-1] + v[:-2]) / (h * h)
    d[0] = (2 * v[0] - 5 * v[1] + 4 * v[2] - v[3]) / (h * h)
    d[-1] = (2 * v[-1] - 5 * v[-2] + 4 * v[-3] - v[-4]) / (h * h)
    return d


def radial_laplacian(geom: RadialGeometry, values: np.ndarray) -> np.ndarray:
    """Delta f = f'' + H_r f' for radial profiles."""
    return second_derivative(geom, values) + geom.H_r * first_derivative(geom, values)


def conformal_radial_laplacian(geom, phi, values) -> np.ndarray:
    """Laplacian of a radial profile in the rescaled metric phi^kappa g.

    For ghat = e^{2w} g one has Delta_ghat f = e^{-2w}(Delta f
    + (n-2) <grad w, grad f>); with e^{2w} = phi^kappa the middle factor
    is kappa (n-2)/2 = 2.
    """
    phi = np.asarray(phi, dtype=float)
    kap = kappa(geom.n)
    dlog_phi = first_derivative(geom, np.log(phi))
    df = first_derivative(geom, values)
    return phi ** (-kap) * (radial_laplacian(geom, values) + 2.0 * dlog_phi * df)


def inner_normal_derivative(geom: RadialGeometry, values: np.ndarray) -> float:
    """Outward normal derivative at the inner boundary, d_nu = -d/dt at t0,
    via the second-order one-sided stencil."""
    v = np.asarray(values, dtype=float)
    h = geom.spacing
    return float((3 * v[0] - 4 * v[1] + v[2]) / (2 * h))


# --- conformal transformation formulas -------------------------------------

def conformal_scalar_curvature(geom: RadialGeometry, phi):
    """Scalar curvature of phi^kappa g.

    Interior nodes use the central-difference radial Laplacian; the two end
    nodes are filled by quadratic extrapolation of the interior profile and
    should not be trusted beyond O(h^2).
    """
    from .grid import GridFunction

    values = phi.values if isinstance(phi, GridFunction) else np.asarray(phi, float)
    if np.any(values <= 0):
        raise ValueError("conformal factor must be positive at every node")
    n = geom.n
    kap = kappa(n)
    lap = radial_laplacian(geom, values)
    out = values ** (-kap - 1) * (
        -(4.0 * (n - 1) / (n - 2)) * lap + geom.scal * values
    )
    out[0] = _quadratic_extrapolate(out[1], out[2], out[3])
    out[-1] = _quadratic_extrapolate(out[-2], out[-3], out[-4])
    return GridFunction(geom, out)


def _quadratic_extrapolate(v1, v2, v3):
    # value at one spacing before v1 on a uniform grid
    return 3.0 * v1 - 3.0 * v2 + v3


def conformal_mean_curvature(geom: RadialGeometry, phi) -> float:
    """Mean curvature of the inner boundary in the metric phi^kappa g,

        Hhat = phi^{-kappa/2} (H + (2(n-1)/(n-2)) phi'(t0)/phi).

    Note the interior gradient coefficient here is 2(n-1)/(n-2); the
    mean-curvature prescription problem in :mod:`ahcurv.scalarcurv` imposes
    its boundary equation with coefficient 2/(n-1) instead.  The two forms
    coincide exactly when phi'(t0) = 0 (constant factors in particular); see
    the scalarcurv module docstring for why both are kept.
    """
    from .grid import GridFunction

    values = phi.values if isinstance(phi, GridFunction) else np.asarray(phi, float)
    phi0 = float(values[0])
    if phi0 <= 0:
        raise ValueError("conformal factor must be positive at the boundary")
    n = geom.n
    kap = kappa(n)
    dphi = -inner_normal_derivative(geom, values)  # = +phi'(t0)
    return phi0 ** (-kap / 2) * (geom.H_inner + (2.0 * (n - 1) / (n - 2)) * dphi / phi0)


# --- serialization ----------------------------------------------------------

def geometry_to_json(geom: RadialGeometry) -> str:
    """Plain JSON document {n, kind, t[], rho[], H_r[], scal[]} for golden
    tests."""
    doc = {
        "n": geom.n,
        "kind": geom.kind.value,
        "t": geom.t.tolist(),
        "rho": geom.rho.tolist(),
        "H_r": geom.H_r.tolist(),
        "scal": geom.scal.tolist(),
    }
    return json.dumps(doc, sort_keys=True)


def geometry_from_json(text: str) -> RadialGeometry:
    doc = json.loads(text)
    kind = GeometryKind(doc["kind"])
    n = doc["n"]
    t = np.asarray(doc["t"], dtype=float)
    if kind is GeometryKind.HYPERBOLIC_EXTERIOR:
        log_warp = np.log(np.sinh(t))
        angular = float((n - 1) * (n - 2))
    elif kind is GeometryKind.TORIC_COLLAR:
        log_warp = t.copy()
        angular = 0.0
    else:
        log_warp = None
        angular = 0.0
    if log_warp is None:
        return make_custom(n, t, doc["rho"], doc["H_r"], doc["scal"])
    return RadialGeometry(
        n=n,
        kind=kind,
        t=t,
        rho=np.asarray(doc["rho"], dtype=float),
        H_r=np.asarray(doc["H_r"], dtype=float),
        scal=np.asarray(doc["scal"], dtype=float),
        log_warp=log_warp,
        angular_scal=angular,
    )
