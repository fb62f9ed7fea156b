"""Lichnerowicz equation with apparent-horizon inner boundary conditions.

Interior equation (kappa = 4/(n-2), normalization
n(n-1) tau^2 - 2 Lambda_c = n(n-1) enforced at spec construction):

  -(4(n-1)/(n-2)) Delta phi + scal phi + n(n-1) phi^{kappa+1}
                                       - |L|^2 phi^{-kappa-3} = 0,

boundary condition on each horizon component (nu the outward normal,
epsilon = -1 future / +1 past horizon):

  (2(n-1)/(n-2)) d_nu phi - H phi
      = epsilon [ L_nn phi^{-1-kappa/2} - (n-1) tau phi^{kappa/2+1} ].

The derivation of this boundary relation carries kappa throughout; a variant
display of the same system prints the boundary exponents with a stray alpha
in place of kappa, which is treated as typographical and not followed.

Sub-solution: the solution phi_eps of the Dirichlet Yamabe-type problem with
value eps at the horizon; its normal derivative is strictly negative for eps
small, which makes the horizon inequality strict.

Super-solutions: a constant does the interior job once it clears
(1 + max|L|^2 / n(n-1))^{1/kappa}, and also the boundary job when
epsilon * tau > 0.  Otherwise the iteration is seeded with an exponential
boundary layer Lam (1 + e^{-m (t - t0)}), searched over (m, Lam) until the
discrete super-solution inequalities hold node-wise.  The glued ODE barrier
(f'' = n(n-2)/4 f^{kappa+1} (+ A h) run backwards from the matching point)
remains the boundary-admissibility certificate built by
:func:`build_supersolution`; on the built-in models, whose scalar curvature
is exactly -n(n-1) up to the boundary, that profile is not a node-wise
discrete super-solution near its matching point (the construction assumes a
conformal gauge with positive scalar curvature near the horizon, which this
artifact does not perform), so it serves as certificate and a-posteriori
upper bound rather than as the iteration seed.

When epsilon * tau = -1 the super-solution needs a positive-Yamabe horizon:
on the toric collar the problem provably has no solution (see the
counterexample integrators below) and the solver refuses with a
"counterexample regime" error.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.integrate import quad, solve_ivp

from . import monotone
from .errors import BarrierError, CounterexampleRegimeError
from .geometry import (
    GeometryKind,
    RadialGeometry,
    first_derivative,
    inner_normal_derivative,
    kappa,
    radial_laplacian,
    second_derivative,
)
from .grid import GridFunction
from .scalarcurv import DirichletBoundary, PrescriptionSpec, solve_prescription
from .ttensor import RadialTT, conformal_divergence_residual

__all__ = [
    "HorizonSpec",
    "OdeBarrier",
    "InitialData",
    "integrate_barrier",
    "blowup_time_quadrature",
    "build_supersolution",
    "subsolution_phi_eps",
    "solve_lichnerowicz",
    "interior_residual",
    "boundary_residual",
    "assemble_initial_data",
    "constraint_residuals",
    "counterexample_integrate",
    "counterexample_scan",
    "CounterexampleTrajectory",
    "CounterexampleScan",
]

logger = logging.getLogger(__name__)

_BLOWUP_FACTOR = 1e6


@dataclass(frozen=True)
class HorizonSpec:
    """Horizon data: sign epsilon per (single) inner-boundary component,
    mean-curvature constant tau, boundary value L_nn = L(nu, nu), and the
    cosmological constant pinned by n(n-1) tau^2 - 2 Lambda_c = n(n-1)."""

    n: int
    epsilon: int
    tau: float
    L_nn: float = 0.0
    lambda_c: float = field(default=None)

    def __post_init__(self):
        if self.epsilon not in (-1, 1):
            raise ValueError(f"epsilon must be +1 or -1, got {self.epsilon}")
        if not -1.0 <= self.tau <= 1.0:
            raise ValueError(f"|tau| <= 1 required, got {self.tau}")
        if self.epsilon * self.L_nn < 0:
            raise ValueError(
                f"epsilon * L_nn >= 0 required, got epsilon={self.epsilon}, "
                f"L_nn={self.L_nn}"
            )
        normalized = self.n * (self.n - 1) * (self.tau**2 - 1.0) / 2.0
        if self.lambda_c is None:
            object.__setattr__(self, "lambda_c", normalized)
        elif abs(self.lambda_c - normalized) > 1e-12 * (1 + abs(normalized)):
            raise ValueError(
                f"lambda_c={self.lambda_c} violates the normalization "
                f"n(n-1) tau^2 - 2 lambda_c = n(n-1) (expected {normalized})"
            )
        if self.lambda_c > 0:
            raise ValueError("cosmological constant must be <= 0")


# --- barrier ODE and blow-up time -------------------------------------------

@dataclass(frozen=True)
class OdeBarrier:
    """Trajectory of f'' = n(n-2)/4 f^{kappa+1} + A f, f(0) = Lambda,
    f'(0) = 0, integrated until f = 1e6 Lambda; blowup_time adds the
    asymptotic tail from the energy identity."""

    Lambda: float
    A: float
    n: int
    x: np.ndarray
    f: np.ndarray
    fp: np.ndarray
    blowup_time: float
    max_energy_residual: float
    _dense: object = field(repr=False, compare=False, default=None)

    def evaluate(self, x: float):
        """(f, f') at 0 <= x < blow-up, from the dense solution."""
        y = self._dense(x)
        return float(y[0]), float(y[1])

    def energy_residual(self) -> np.ndarray:
        """Relative residual of the first integral
        f'^2 = (n-2)^2/4 (f^{kappa+2} - Lambda^{kappa+2}) + A (f^2 - Lambda^2)."""
        kap = kappa(self.n)
        rhs = ((self.n - 2) ** 2 / 4.0) * (self.f ** (kap + 2) - self.Lambda ** (kap + 2))
        rhs = rhs + self.A * (self.f**2 - self.Lambda**2)
        lhs = self.fp**2
        return np.abs(lhs - rhs) / (1.0 + np.abs(lhs) + np.abs(rhs))


def integrate_barrier(Lambda: float, n: int, A: float = 0.0, tol: float = 1e-12) -> OdeBarrier:
    """Adaptive integration of the barrier ODE up to f = 1e6 Lambda."""
    if Lambda <= 1.0:
        raise ValueError(f"Lambda must exceed 1, got {Lambda}")
    if A < 0.0:
        raise ValueError(f"A must be >= 0, got {A}")
    kap = kappa(n)
    coeff = n * (n - 2) / 4.0

    def rhs(x, y):
        return (y[1], coeff * y[0] ** (kap + 1.0) + A * y[0])

    stop = _BLOWUP_FACTOR * Lambda

    def blown(x, y):
        return y[0] - stop

    blown.terminal = True
    blown.direction = 1.0

    horizon = 2.0 * blowup_time_quadrature(Lambda, n)
    sol = solve_ivp(
        rhs,
        (0.0, horizon),
        (Lambda, 0.0),
        method="DOP853",
        rtol=max(min(tol, 1e-10), 2.5e-14),
        atol=1e-14 * Lambda,
        events=blown,
        dense_output=True,
    )
    if not sol.success or sol.t_events[0].size == 0:
        raise ArithmeticError(f"barrier integration failed: {sol.message}")
    x_stop = float(sol.t_events[0][0])
    xs = np.linspace(0.0, x_stop, 2001)
    ys = sol.sol(xs)
    f_stop = float(sol.y_events[0][0][0])
    # remaining time from f' ~ (n-2)/2 f^{1+kappa/2}: integral = f^{-kappa/2}
    tail = f_stop ** (-kap / 2.0)
    barrier = OdeBarrier(
        Lambda=float(Lambda),
        A=float(A),
        n=n,
        x=xs,
        f=ys[0],
        fp=ys[1],
        blowup_time=x_stop + tail,
        max_energy_residual=0.0,
        _dense=sol.sol,
    )
    object.__setattr__(barrier, "max_energy_residual", float(np.max(barrier.energy_residual())))
    if np.any(np.diff(barrier.f) < 0):
        raise ArithmeticError("barrier trajectory is not nondecreasing")
    return barrier


@lru_cache(maxsize=None)
def _profile_integral(n: int) -> float:
    """I = int_1^inf dz / sqrt(z^{kappa+2} - 1), via z = 1 + s^2 to tame the
    inverse-square-root endpoint."""
    p = kappa(n) + 2.0

    def integrand(s):
        z = 1.0 + s * s
        return 2.0 * s / math.sqrt(z**p - 1.0)

    with np.errstate(over="ignore"):
        inner, _ = quad(integrand, 0.0, 1.0, epsabs=1e-14, epsrel=1e-13)
        outer, _ = quad(integrand, 1.0, np.inf, epsabs=1e-14, epsrel=1e-13)
    return inner + outer


def blowup_time_quadrature(Lambda: float, n: int) -> float:
    """delta_Lambda = (2 I/(n-2)) Lambda^{-kappa/2} with
    I = int_1^inf dz/sqrt(z^{kappa+2} - 1)."""
    if Lambda <= 1.0:
        raise ValueError(f"Lambda must exceed 1, got {Lambda}")
    kap = kappa(n)
    return 2.0 * _profile_integral(n) / (n - 2) * Lambda ** (-kap / 2.0)


# --- residual forms ----------------------------------------------------------

def interior_residual(geom: RadialGeometry, phi_values, L_sq_values) -> np.ndarray:
    """Node-wise discrete Lichnerowicz operator value."""
    n = geom.n
    kap = kappa(n)
    phi = np.asarray(phi_values, dtype=float)
    L = np.asarray(L_sq_values, dtype=float)
    return (
        -(4.0 * (n - 1) / (n - 2)) * radial_laplacian(geom, phi)
        + geom.scal * phi
        + n * (n - 1) * np.power(phi, kap + 1.0)
        - L * np.power(phi, -kap - 3.0)
    )


def boundary_residual(geom: RadialGeometry, spec: HorizonSpec, phi_values) -> float:
    """Discrete horizon-condition residual at the inner boundary."""
    n = geom.n
    kap = kappa(n)
    phi0 = float(np.asarray(phi_values)[0])
    dnu = inner_normal_derivative(geom, phi_values)
    lhs = (2.0 * (n - 1) / (n - 2)) * dnu - geom.H_inner * phi0
    rhs = spec.epsilon * (
        spec.L_nn * phi0 ** (-1.0 - kap / 2.0)
        - (n - 1) * spec.tau * phi0 ** (kap / 2.0 + 1.0)
    )
    return lhs - rhs


def _boundary_super_margin(geom, spec, f_delta, fp_delta) -> float:
    """LHS - RHS of the horizon super-solution inequality for the glued ODE
    profile, using the trajectory slope (equals the energy form when A=0)."""
    n = geom.n
    kap = kappa(n)
    return (
        (2.0 * (n - 1) / (n - 2)) * fp_delta
        + (n - 1) * spec.epsilon * spec.tau * f_delta ** (1.0 + kap / 2.0)
        - geom.H_inner * f_delta
        - spec.epsilon * spec.L_nn * f_delta ** (-1.0 - kap / 2.0)
    )


def _require_yamabe_positive(geom: RadialGeometry, spec: HorizonSpec):
    if spec.epsilon * spec.tau == -1.0:
        if geom.kind is not GeometryKind.HYPERBOLIC_EXTERIOR:
            raise CounterexampleRegimeError(
                "epsilon * tau = -1 with a non positive-Yamabe inner boundary: "
                "no solution is guaranteed (toric counterexample regime)"
            )


# --- barriers ----------------------------------------------------------------

def build_supersolution(geom: RadialGeometry, spec: HorizonSpec, Lambda: float,
                        L_sq: Optional[GridFunction] = None) -> GridFunction:
    """Glued ODE super-solution profile: Lambda outside a collar of width
    delta, f(delta - r) inside, with (Lambda, delta) swept geometrically
    (Lambda doubling from the given value, delta in {0.5, 0.75, 0.9, 0.99}
    of the blow-up time) until the horizon inequality holds.

    For epsilon*tau = -1 the ODE gains the A h term with
    A = half of (n-2)/(4(n-1)) times the boundary scalar curvature; the
    admissibility is verified numerically, and with the built-in models'
    un-gauged boundary data the sweep can legitimately fail.
    """
    if spec.n != geom.n:
        raise ValueError("spec dimension differs from the geometry")
    _require_yamabe_positive(geom, spec)
    n = geom.n
    kap = kappa(n)
    if spec.epsilon * spec.tau == -1.0:
        scal_boundary = geom.angular_scal * math.exp(-2.0 * geom.log_warp[0])
        if scal_boundary <= 0.0:
            raise CounterexampleRegimeError(
                "epsilon * tau = -1 requires a positive-Yamabe inner boundary"
            )
        A_ode = 0.5 * (n - 2) / (4.0 * (n - 1)) * scal_boundary
    else:
        A_ode = 0.0

    L_vals = L_sq.values if L_sq is not None else np.zeros(geom.num_nodes)
    span = geom.t[-1] - geom.t[0]
    best_margin = -math.inf
    lam = float(Lambda)
    for _ in range(9):
        flat = geom.scal * lam + n * (n - 1) * lam ** (kap + 1.0) - L_vals * lam ** (-kap - 3.0)
        if float(np.min(flat)) >= 0.0:
            barrier = integrate_barrier(lam, n, A_ode)
            for frac in (0.5, 0.75, 0.9, 0.99):
                delta = frac * barrier.blowup_time
                if delta >= span:
                    continue
                f_d, fp_d = barrier.evaluate(delta)
                margin = _boundary_super_margin(geom, spec, f_d, fp_d)
                best_margin = max(best_margin, margin)
                if margin >= 0.0:
                    r = geom.t - geom.t[0]
                    prof = np.full(geom.num_nodes, lam)
                    collar = r <= delta
                    vals = barrier._dense(delta - r[collar])
                    prof[collar] = vals[0]
                    logger.info(
                        "super-solution admissible: Lambda=%.6g delta=%.6g "
                        "(%.2f of blow-up), horizon margin %.6g",
                        lam, delta, frac, margin,
                    )
                    return GridFunction(geom, prof)
        lam *= 2.0
    raise BarrierError(
        "no admissible (Lambda, delta) in the search budget; best horizon "
        f"margin {best_margin:.6g}.  With epsilon*tau = -1 this is expected on "
        "the fixed models: the construction needs the conformal gauge flattening "
        "the boundary mean curvature, which is out of scope"
    )


def subsolution_phi_eps(geom: RadialGeometry, eps_value: float = 1e-2,
                        tol: float = 1e-10) -> GridFunction:
    """Yamabe-type Dirichlet solve with value eps at the horizon; the
    resulting profile has strictly negative outward normal derivative for
    eps small, making it a horizon sub-solution."""
    if eps_value <= 0:
        raise ValueError(f"eps must be positive, got {eps_value}")
    n = geom.n
    spec = PrescriptionSpec(
        geom=geom,
        scal_hat=GridFunction.constant(geom, -float(n * (n - 1))),
        boundary=DirichletBoundary(eps_value),
    )
    phi, _ = solve_prescription(spec, tol=tol)
    logger.debug(
        "phi_eps(eps=%.3g): boundary normal derivative %.6g",
        eps_value, inner_normal_derivative(geom, phi.values),
    )
    return phi


def _boundary_reactions(geom, spec):
    n = geom.n
    kap = kappa(n)
    c2 = (n - 2) / (2.0 * (n - 1))
    terms = [monotone.BoundaryReaction(c2 * geom.H_inner, 1.0)]
    if spec.L_nn != 0.0:
        terms.append(monotone.BoundaryReaction(c2 * spec.epsilon * spec.L_nn, -1.0 - kap / 2.0))
    if spec.tau != 0.0:
        terms.append(
            monotone.BoundaryReaction(-0.5 * (n - 2) * spec.epsilon * spec.tau, kap / 2.0 + 1.0)
        )
    return terms


def _discrete_super_ok(geom, spec, L_vals, prof, b_terms) -> bool:
    res = interior_residual(geom, prof, L_vals)
    if float(np.min(res[1:-1])) < 0.0:
        return False
    bres = inner_normal_derivative(geom, prof) - monotone.evaluate_boundary(
        monotone.RobinBC(b_terms), float(prof[0])
    )
    return bres >= 0.0


def _discrete_sub_ok(geom, spec, L_vals, prof, b_terms, slack) -> bool:
    res = interior_residual(geom, prof, L_vals)
    if float(np.max(res[1:-1])) > slack:
        return False
    bres = inner_normal_derivative(geom, prof) - monotone.evaluate_boundary(
        monotone.RobinBC(b_terms), float(prof[0])
    )
    return bres <= slack


def _supersolution_seed(geom, spec, L_vals, b_terms, phi_minus):
    """Smallest admissible discrete super-solution start: constants first,
    then exponential boundary layers Lam (1 + e^{-m(t-t0)})."""
    for k in range(1, 13):
        lam = float(2**k)
        prof = np.full(geom.num_nodes, lam)
        if np.any(prof < phi_minus):
            continue
        if _discrete_super_ok(geom, spec, L_vals, prof, b_terms):
            logger.debug("super-solution seed: constant %.6g", lam)
            return prof
    m0 = max(4.0, 2.0 * float(np.max(np.abs(geom.H_r))))
    x = geom.t - geom.t[0]
    for j in range(7):
        m = m0 * 2**j
        for k in range(1, 13):
            lam = float(2**k)
            prof = lam * (1.0 + np.exp(-m * x))
            if np.any(prof < phi_minus):
                continue
            if _discrete_super_ok(geom, spec, L_vals, prof, b_terms):
                logger.debug("super-solution seed: layer Lam=%.6g m=%.6g", lam, m)
                return prof
    raise BarrierError(
        "no discrete super-solution seed found (constants and boundary layers "
        "exhausted); epsilon*tau = -1 horizon data needs the boundary gauge, "
        "which is out of scope"
    )


def solve_lichnerowicz(geom: RadialGeometry, spec: HorizonSpec, L_sq: GridFunction,
                       tol: float = 1e-10, max_iter: int = 200_000):
    """Monotone solve of the horizon problem; returns (phi, report).

    Raises CounterexampleRegimeError for epsilon*tau = -1 on the toric
    collar, where non-existence is demonstrated by the counterexample
    integrators.
    """
    if spec.n != geom.n:
        raise ValueError("spec dimension differs from the geometry")
    _require_yamabe_positive(geom, spec)
    L_vals = L_sq.values
    if np.any(L_vals < 0):
        raise ValueError("|L|^2 must be nonnegative")

    n = geom.n
    kap = kappa(n)
    c1 = (n - 2) / (4.0 * (n - 1))
    terms = [
        monotone.ReactionTerm(GridFunction(geom, -c1 * geom.scal), 1.0),
        monotone.ReactionTerm(GridFunction.constant(geom, -n * (n - 2) / 4.0), kap + 1.0),
    ]
    if np.any(L_vals > 0):
        terms.append(monotone.ReactionTerm(GridFunction(geom, c1 * L_vals), -kap - 3.0))
    b_terms = _boundary_reactions(geom, spec)

    slack = 10.0 * geom.spacing**2 * (1.0 + float(np.max(np.abs(L_vals))) + n * (n - 1))
    phi_minus = None
    for eps in (0.5, 0.25, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002):
        candidate = subsolution_phi_eps(geom, eps, tol=min(tol, 1e-10))
        if _discrete_sub_ok(geom, spec, L_vals, candidate.values, b_terms, slack):
            phi_minus = candidate
            logger.debug("sub-solution seed: phi_eps with eps=%.3g", eps)
            break
    if phi_minus is None:
        raise BarrierError("no admissible horizon sub-solution phi_eps found")

    seed = _supersolution_seed(geom, spec, L_vals, b_terms, phi_minus.values)
    problem = monotone.NonlinearProblem(
        geom,
        terms,
        monotone.RobinBC(b_terms),
        outer_value=1.0,
        bracket=(phi_minus, GridFunction(geom, seed)),
    )
    return monotone.iterate(problem, tol=tol, max_iter=max_iter)


# --- initial data and constraints -------------------------------------------

@dataclass(frozen=True)
class InitialData:
    """Conformal-method output: physical metric ghat = phi^kappa g and
    extrinsic curvature Khat = phi^{-2} L + tau ghat."""

    geom: RadialGeometry
    phi: GridFunction
    mu: GridFunction
    tau: float
    lambda_c: float

    def __post_init__(self):
        if np.any(self.phi.values <= 0):
            raise ValueError("conformal factor must be positive")

    @property
    def trace_khat(self) -> float:
        """tr_ghat Khat = n tau exactly (L is trace-free)."""
        return self.geom.n * self.tau

    def l_squared(self) -> np.ndarray:
        return self.mu.values**2 * self.geom.n / (self.geom.n - 1)


def assemble_initial_data(geom: RadialGeometry, phi: GridFunction,
                          L_profile, tau: float) -> InitialData:
    """Package (phi, L, tau) as CMC vacuum initial data; L_profile may be a
    RadialTT, a mu profile, or None for L = 0."""
    if L_profile is None:
        mu = GridFunction.constant(geom, 0.0)
    elif isinstance(L_profile, RadialTT):
        mu = L_profile.mu
    else:
        mu = L_profile
    n = geom.n
    lambda_c = n * (n - 1) * (tau**2 - 1.0) / 2.0
    return InitialData(geom=geom, phi=phi, mu=mu, tau=float(tau), lambda_c=lambda_c)


def constraint_residuals(data: InitialData):
    """Hamiltonian and momentum constraint residual profiles of the physical
    data, evaluated through the warped-product curvature of ghat (a route
    independent of the Lichnerowicz discretization, so solver output shows
    the O(h^2) convergence of the assembled data)."""
    geom = data.geom
    n = geom.n
    kap = kappa(n)
    phi = data.phi.values
    mu = data.mu.values

    a = geom.warp_ratio  # (log q)'
    a_prime = geom.warp_second_ratio - a**2  # (log q)''
    log_phi = np.log(phi)
    wp = 0.5 * kap * first_derivative(geom, log_phi)  # ((kappa/2) log phi)'
    wpp = 0.5 * kap * second_derivative(geom, log_phi)
    total = a + wp  # (log qhat)'
    phi_mk2 = phi ** (-0.5 * kap)
    # second t-hat derivative of qhat over qhat
    qhat_tt = phi ** (-kap) * (a_prime + wpp + total**2 - wp * total)
    qhat_t = phi_mk2 * total
    qhat_sq = np.exp(2.0 * geom.log_warp) * phi**kap
    scal_ghat = (
        geom.angular_scal / qhat_sq
        - 2.0 * (n - 1) * qhat_tt
        - (n - 1) * (n - 2) * qhat_t**2
    )
    l_sq_ghat = phi ** (-2.0 * kap - 4.0) * mu**2 * n / (n - 1)
    ham = scal_ghat - 2.0 * data.lambda_c - l_sq_ghat - (n - n**2) * data.tau**2
    mom = conformal_divergence_residual(geom, data.mu, data.phi)
    return GridFunction(geom, ham), mom


# --- toric counterexample ----------------------------------------------------

@dataclass(frozen=True)
class CounterexampleTrajectory:
    """Radial profile of the would-be toric horizon solution and its first
    integral B = phi' + (n-2)/2 (phi + phi^{kappa/2+1}), which vanishes at
    r = 0 by the boundary relation and is conserved, so no trajectory can
    reach the asymptotic value 1 (where B would equal n-2)."""

    n: int
    a: float
    r: np.ndarray
    phi: np.ndarray
    phi_prime: np.ndarray
    B: np.ndarray
    max_abs_B: float
    terminal_phi: float
    min_distance_from_one_tail: float
    monotone_decreasing: bool


def counterexample_integrate(n: int, a: float, r_max: float = 20.0,
                             tol: float = 1e-13) -> CounterexampleTrajectory:
    """Integrate phi'' + (n-1) phi' + n(n-2)/4 (phi - phi^{kappa+1}) = 0 with
    -phi'(0) = (n-2)/2 (a + a^{kappa/2+1}), phi(0) = a."""
    if a <= 0:
        raise ValueError(f"a must be positive, got {a}")
    kap = kappa(n)
    c = n * (n - 2) / 4.0

    def rhs(r, y):
        phi = y[0]
        return (y[1], -(n - 1) * y[1] - c * (phi - phi ** (kap + 1.0)))

    def hit_zero(r, y):
        return y[0] - 1e-12

    hit_zero.terminal = True
    hit_zero.direction = -1.0

    phi0 = float(a)
    dphi0 = -(n - 2) / 2.0 * (phi0 + phi0 ** (kap / 2.0 + 1.0))
    sol = solve_ivp(
        rhs,
        (0.0, r_max),
        (phi0, dphi0),
        method="DOP853",
        rtol=max(tol, 2.5e-14),
        atol=1e-15,
        events=hit_zero,
        dense_output=True,
    )
    if not sol.success:
        raise ArithmeticError(f"counterexample integration failed: {sol.message}")
    r_end = float(sol.t[-1])
    rs = np.linspace(0.0, r_end, 2001)
    ys = sol.sol(rs)
    phi = ys[0]
    dphi = ys[1]
    B = dphi + (n - 2) / 2.0 * (phi + np.power(phi, kap / 2.0 + 1.0))
    tail = rs >= r_end / 2.0
    return CounterexampleTrajectory(
        n=n,
        a=float(a),
        r=rs,
        phi=phi,
        phi_prime=dphi,
        B=B,
        max_abs_B=float(np.max(np.abs(B))),
        terminal_phi=float(phi[-1]),
        min_distance_from_one_tail=float(np.min(np.abs(phi[tail] - 1.0))),
        monotone_decreasing=bool(np.all(np.diff(phi) <= 1e-12)),
    )


@dataclass(frozen=True)
class CounterexampleScan:
    n: int
    a_values: np.ndarray
    trajectories: tuple
    max_abs_B: float
    no_solution_found: bool


def counterexample_scan(n: int, a_grid, r_max: float = 20.0,
                        tol: float = 1e-13) -> CounterexampleScan:
    """Integrate every starting value; the summary flag reports that no
    trajectory settles anywhere near the constant solution 1."""
    a_values = np.asarray(list(a_grid), dtype=float)
    if a_values.size == 0 or np.any(a_values <= 0):
        raise ValueError("a_grid must contain positive values")
    trajectories = tuple(
        counterexample_integrate(n, float(a), r_max=r_max, tol=tol) for a in a_values
    )
    max_abs_B = max(t.max_abs_B for t in trajectories)
    diverge = all(t.terminal_phi < 0.5 for t in trajectories)
    return CounterexampleScan(
        n=n,
        a_values=a_values,
        trajectories=trajectories,
        max_abs_B=max_abs_B,
        no_solution_found=diverge,
    )
