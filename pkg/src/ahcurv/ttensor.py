"""Radial transverse-traceless tensors and their potentials.

A radial traceless symmetric 2-tensor on a warped product
g = dt^2 + q(t)^2 h is encoded by a single profile mu:

  L_tt = mu,   L_ab = -mu/(n-1) * g_ab,

trace-free by representation.  Its radial divergence is

  (div L)_t = mu' + n (q'/q) mu,

so the transverse condition div L = 0 has the one-dimensional kernel
mu ~ q^{-n} (sinh^{-n} t on the hyperbolic exterior, e^{-nt} on the toric
collar).  The conformal Killing image of a radial 1-form psi = u dt is

  (CK u)_tt = (2(n-1)/n) w,   w = u' - (q'/q) u,

with angular part -(2/n) w g_ab; the potential u = q (u = sinh t) has w = 0
and generates nothing.

Given a traceless source profile lambda and a boundary datum b (the radial
component of the prescribed 1-form L(nu, .), nu the outward normal, so the
output satisfies mu(t0) = -b), the transverse completion L = L0 + CK(u)
requires

  (2(n-1)/n) [w' + n (q'/q) w] = -[lambda' + n (q'/q) lambda],

a first-order linear ODE integrated with the exact kernel exp(-n log q),
after which u is recovered from u' - (q'/q) u = w with the decaying branch
selected at the outer end (the growing branch u ~ q, i.e. rho^{-2} in the
compactified frame, is the excluded indicial mode; the retained one decays
like q^{-n}, i.e. rho^{n-1}).
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import RadialGeometry, first_derivative, kappa
from .grid import GridFunction, fit_decay_rate

__all__ = [
    "RadialTT",
    "conformal_killing_image",
    "solve_tt",
    "divergence_residual",
    "conformal_divergence_residual",
    "indicial_check",
    "analytic_tt",
]

logger = logging.getLogger(__name__)

TRACE_TOL = 1e-14


@dataclass(frozen=True)
class RadialTT:
    """Scalar profiles encoding a radial TT construction: source lambda0,
    boundary datum b, potential u, image w = u' - (q'/q) u, result mu."""

    geom: RadialGeometry
    lambda0: GridFunction
    b: float
    u: GridFunction
    w: GridFunction
    mu: GridFunction

    def __post_init__(self):
        check = reconstructed_trace(self.geom, self.mu.values)
        if check > TRACE_TOL:
            raise AssertionError(f"reconstructed trace {check:.3e} exceeds {TRACE_TOL}")

    def l_squared(self) -> GridFunction:
        """|L|^2_g = mu^2 n/(n-1), the Lichnerowicz source profile."""
        n = self.geom.n
        return GridFunction(self.geom, self.mu.values ** 2 * n / (n - 1))

    @property
    def boundary_normal_value(self) -> float:
        """L(nu, nu) at the inner boundary (= mu(t0) = -b)."""
        return float(self.mu.values[0])


def reconstructed_trace(geom: RadialGeometry, mu_values: np.ndarray) -> float:
    """Relative size of g^{ij} L_ij rebuilt the pedestrian way,
    mu + (n-1) * (-mu/(n-1)); zero up to a rounding ulp."""
    n = geom.n
    trace = mu_values + (n - 1) * (-mu_values / (n - 1))
    scale = float(np.max(np.abs(mu_values)))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(trace))) / scale


def conformal_killing_image(geom: RadialGeometry, u: GridFunction):
    """Trace-free part of the deformation generated by psi = u dt; returns
    (L_tt profile, reconstructed-trace check)."""
    n = geom.n
    w = first_derivative(geom, u.values) - geom.warp_ratio * u.values
    mu = (2.0 * (n - 1) / n) * w
    return GridFunction(geom, mu), reconstructed_trace(geom, mu)


def _decaying_potential(geom: RadialGeometry, w: np.ndarray) -> np.ndarray:
    """Solve u' - (q'/q) u = w keeping only the branch with u = o(q).

    Writing u = q v gives v' = w/q; v is integrated inward from the outer
    end, seeded with the analytic tail -s(T)/rate of the locally fitted
    exponential decay of s = w/q (rate n+1 for the kernel mode), so the
    retained branch decays instead of riding the excluded u ~ q mode.
    """
    Q = geom.log_warp
    h = geom.spacing
    n = geom.n
    q_rel = np.exp(Q - Q[0])
    s = w / q_rel
    v = np.empty(geom.num_nodes)
    rate = float(n + 1)
    if s[-1] != 0.0 and s[-2] != 0.0 and s[-1] * s[-2] > 0.0:
        local = math.log(abs(s[-2] / s[-1])) / h
        if local > 0.1:
            rate = local
    v[-1] = -s[-1] / rate
    for i in range(geom.num_nodes - 2, -1, -1):
        v[i] = v[i + 1] - 0.5 * h * (s[i] + s[i + 1])
    return q_rel * v


def solve_tt(geom: RadialGeometry, lambda0: GridFunction, b: float) -> RadialTT:
    """Complete the traceless source lambda0 to a transverse profile with
    L(nu, .) radial component b at the inner boundary.

    The transverse equation forces mu' + n (q'/q) mu = 0 with mu(t0) = -b,
    whose integrating-factor solution -b exp(-n (log q - log q(t0))) is
    written down directly; the potential is then the unique decaying 1-form
    realizing mu - lambda0 as a conformal Killing image.
    """
    n = geom.n
    lam = lambda0.values
    fit = fit_decay_rate(lambda0)
    if not math.isinf(fit.delta_hat) and not (-1.0 < fit.delta_hat):
        warnings.warn(
            f"source profile decays like rho^{fit.delta_hat:.3f}, outside the "
            f"admissible weight window (-1, {n}); the construction may leave it",
            RuntimeWarning,
            stacklevel=2,
        )
    c = 2.0 * (n - 1) / n
    mu = -b * np.exp(-n * (geom.log_warp - geom.log_warp[0]))
    w = (mu - lam) / c
    u = _decaying_potential(geom, w)
    return RadialTT(
        geom=geom,
        lambda0=lambda0,
        b=float(b),
        u=GridFunction(geom, u),
        w=GridFunction(geom, w),
        mu=GridFunction(geom, mu),
    )


def divergence_residual(geom: RadialGeometry, tt) -> GridFunction:
    """Node-wise radial divergence mu' + n (q'/q) mu of the result profile."""
    mu = tt.mu.values if isinstance(tt, RadialTT) else np.asarray(
        tt.values if isinstance(tt, GridFunction) else tt, dtype=float
    )
    res = first_derivative(geom, mu) + geom.n * geom.warp_ratio * mu
    return GridFunction(geom, res)


def conformal_divergence_residual(geom: RadialGeometry, mu: GridFunction,
                                  phi: GridFunction) -> GridFunction:
    """Radial divergence of phi^{-2} L in the rescaled metric phi^kappa g.

    The rescaled warp is qhat = phi^{kappa/2} q and the rescaled profile
    muhat = phi^{-2-kappa} mu; the residual is evaluated in the qhat frame
    (d/dthat = phi^{-kappa/2} d/dt).  Vanishes identically in the continuum
    when mu is transverse for g (conformal equivariance).
    """
    n = geom.n
    kap = kappa(n)
    phi_v = phi.values
    mu_hat = phi_v ** (-2.0 - kap) * mu.values
    dlog_qhat = geom.warp_ratio + 0.5 * kap * first_derivative(geom, np.log(phi_v))
    res = phi_v ** (-0.5 * kap) * (
        first_derivative(geom, mu_hat) + n * dlog_qhat * mu_hat
    )
    return GridFunction(geom, res)


def indicial_check(geom: RadialGeometry):
    """Fit the two homogeneous-mode exponents of the potential in the
    compactified frame (coefficient of d rho is u/rho ~ rho^s).

    The growing mode u ~ q gives s = -2, the decaying mode u ~ q^{-n} gives
    s = n - 1; the indicial radius is half their separation, (n+1)/2.
    """
    if geom.rho[-1] > 1e-4:
        raise ValueError(
            f"insufficient decay window: rho(T) = {geom.rho[-1]:.3e} > 1e-4; "
            "push the outer truncation further out"
        )
    q_rel = np.exp(geom.log_warp - geom.log_warp[0])
    grow = GridFunction(geom, q_rel / geom.rho)
    s_minus = fit_decay_rate(grow).delta_hat

    w = q_rel ** (-geom.n)
    u = _decaying_potential(geom, w)
    decay = GridFunction(geom, np.abs(u) / geom.rho)
    s_plus = fit_decay_rate(decay).delta_hat
    logger.debug("indicial fit: s=(%.4f, %.4f), radius %.4f",
                 s_minus, s_plus, 0.5 * (s_plus - s_minus))
    return s_minus, s_plus


def analytic_tt(geom: RadialGeometry, C: float) -> RadialTT:
    """Closed-form kernel element mu = C q^{-n} (C sinh^{-n} t on the
    hyperbolic exterior, C e^{-nt} on the toric collar), with its decaying
    potential; used as a Lichnerowicz source.  The horizon-sign constraint
    epsilon * L(nu,nu) >= 0 at the boundary reads epsilon * mu(t0) >= 0.
    """
    n = geom.n
    mu = C * np.exp(-n * geom.log_warp)
    w = (n / (2.0 * (n - 1))) * mu
    u = _decaying_potential(geom, w)
    return RadialTT(
        geom=geom,
        lambda0=GridFunction.constant(geom, 0.0),
        b=-float(mu[0]),
        u=GridFunction(geom, u),
        w=GridFunction(geom, w),
        mu=GridFunction(geom, mu),
    )
