"""Scalar-curvature prescription with Dirichlet or mean-curvature data.

Solves, for a prescribed target curvature scal_hat < 0 approaching -n(n-1)
at infinity,

  -(4(n-1)/(n-2)) Delta phi + scal * phi = scal_hat * phi^{kappa+1}

with phi -> 1 at the outer truncation and either phi = phi_0 > 0 at the
inner boundary or the mean-curvature relation

  (2/(n-1)) d_nu phi - H phi = -H_hat phi^{kappa/2+1}.

Coefficient caveat: the mean-curvature problem above carries the interior
gradient with coefficient 2/(n-1), while the conformal transformation law
implemented by :func:`ahcurv.geometry.conformal_mean_curvature` carries
2(n-1)/(n-2).  The two displayed relations are kept as displayed rather than
harmonized; they agree exactly whenever phi'(t0) = 0, which covers the
constant-factor identities used in the tests.

The iteration bracket is the truncated cone  phi_sigma = max(sigma - rho, 0)
below (sigma the largest grid value with sigma^kappa <= min scal/scal_hat on
{rho <= sigma} and with Delta rho <= 0 there) and a constant above, raised
until the constant satisfies the discrete super-solution inequalities.

Asymptotic barriers 1 +- {K,k} rho^delta certify the decay rate delta of
phi - 1; their validity inequality is

  4 (delta+1)(n-delta)/(n-2)  >  n * A_{kappa+1} * (1 - lambda),

with A_p = max{p, p(p-1)/2} the constant in the convexity bound
(1+u)^{kappa+1} - 1 - (kappa+1) u <= A_{kappa+1} u^2 on u in [-1, 0].
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import monotone
from .errors import BarrierError
from .geometry import RadialGeometry, kappa, radial_laplacian
from .grid import DecayFit, GridFunction, fit_decay_rate

__all__ = [
    "DirichletBoundary",
    "MeanCurvatureBoundary",
    "PrescriptionSpec",
    "AsymptoticBarriers",
    "DecayVerification",
    "convexity_coefficient",
    "subsolution_sigma",
    "solve_prescription",
    "asymptotic_barriers",
    "verify_decay",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DirichletBoundary:
    phi0: float


@dataclass(frozen=True)
class MeanCurvatureBoundary:
    H_hat: float


@dataclass(frozen=True)
class PrescriptionSpec:
    geom: RadialGeometry
    scal_hat: GridFunction
    boundary: object  # DirichletBoundary | MeanCurvatureBoundary
    delta: Optional[float] = None

    def __post_init__(self):
        if np.any(self.scal_hat.values >= 0):
            raise ValueError("target scalar curvature must be negative everywhere")
        if isinstance(self.boundary, DirichletBoundary):
            if self.boundary.phi0 <= 0:
                raise ValueError("Dirichlet boundary value must be positive")
        elif isinstance(self.boundary, MeanCurvatureBoundary):
            if self.boundary.H_hat < 0:
                raise ValueError("prescribed boundary mean curvature must be >= 0")
        else:
            raise ValueError(f"unsupported boundary data {self.boundary!r}")
        if self.delta is not None:
            if not (0.0 < self.delta < self.geom.n):
                raise ValueError(
                    f"decay weight delta={self.delta} outside (0, n={self.geom.n}); "
                    "weights >= n are rejected (mass obstruction)"
                )


def convexity_coefficient(p: float) -> float:
    """A_p = max{p, p(p-1)/2} in the bound (1+u)^p - 1 - p u <= A_p u^2."""
    return max(p, p * (p - 1) / 2.0)


def subsolution_sigma(spec: PrescriptionSpec):
    """Largest grid value sigma (capped at 1) making the truncated cone
    max(sigma - rho, 0) a sub-solution: sigma^kappa <= min scal/scal_hat and
    Delta rho <= 0 on {rho <= sigma}."""
    geom = spec.geom
    if np.any(geom.scal >= 0):
        raise BarrierError("cone sub-solution requires negative ambient scalar curvature")
    kap = kappa(geom.n)
    ratio = geom.scal / spec.scal_hat.values
    lap_rho = radial_laplacian(geom, geom.rho)
    slack = 10.0 * geom.spacing ** 2 * (1.0 + float(np.max(np.abs(geom.rho))))
    best = None
    worst_gap = math.inf
    for j in range(geom.num_nodes - 1):
        sigma = float(geom.rho[j])
        if sigma > 1.0:
            continue
        mask = geom.rho <= sigma
        gap = float(np.min(ratio[mask])) - sigma ** kap
        worst_gap = min(worst_gap, -gap) if gap < 0 else worst_gap
        if gap < 0:
            continue
        if float(np.max(lap_rho[mask])) > slack:
            continue
        best = (sigma, j)
        break
    if best is None:
        raise BarrierError(
            "no admissible sigma: the inequality sigma^kappa <= min(scal/scal_hat) "
            f"fails for every grid value (worst violation {worst_gap:.3e}); the "
            "target curvature strays too far from -n(n-1) near infinity"
        )
    sigma, _ = best
    phi_sigma = GridFunction(geom, np.maximum(sigma - geom.rho, 0.0))
    return sigma, phi_sigma


def _interior_reactions(geom, scal_hat):
    n = geom.n
    kap = kappa(n)
    c1 = (n - 2) / (4.0 * (n - 1))
    return (
        monotone.ReactionTerm(GridFunction(geom, -c1 * geom.scal), 1.0),
        monotone.ReactionTerm(GridFunction(geom, c1 * scal_hat.values), kap + 1.0),
    )


def solve_prescription(spec: PrescriptionSpec, tol: float = 1e-10, max_iter: int = 100_000):
    """Monotone solve of the prescription problem; returns (phi, report)."""
    geom = spec.geom
    n = geom.n
    kap = kappa(n)
    sigma, phi_sigma = subsolution_sigma(spec)
    ratio = geom.scal / spec.scal_hat.values
    lam_base = max(1.0, float(np.max(ratio)) ** (1.0 / kap))

    if isinstance(spec.boundary, DirichletBoundary):
        phi0 = spec.boundary.phi0
        bc = monotone.DirichletBC(phi0)
        lam_base = max(lam_base, phi0)
    else:
        H_hat = spec.boundary.H_hat
        H = geom.H_inner
        if H_hat > 0:
            lam_base = max(lam_base, (max(H, 0.0) / H_hat) ** (2.0 / kap))
        elif H > 0:
            raise BarrierError(
                "no constant super-solution: H_hat = 0 with positive boundary mean "
                "curvature needs a preliminary conformal change that is out of scope"
            )
        bc = monotone.RobinBC([
            monotone.BoundaryReaction(0.5 * (n - 1) * H, 1.0),
            monotone.BoundaryReaction(-0.5 * (n - 1) * H_hat, kap / 2.0 + 1.0),
        ])

    big = 1.5 * lam_base
    logger.debug("prescription solve: sigma=%.6g Lambda=%.6g", sigma, big)
    problem = monotone.NonlinearProblem(
        geom,
        _interior_reactions(geom, spec.scal_hat),
        bc,
        outer_value=1.0,
        bracket=(phi_sigma, GridFunction.constant(geom, big)),
    )
    return monotone.iterate(problem, tol=tol, max_iter=max_iter)


@dataclass(frozen=True)
class AsymptoticBarriers:
    K: float
    k: float
    valid: bool
    margin: float
    sigma: float


def asymptotic_barriers(spec: PrescriptionSpec, lam: float, Lam: float) -> AsymptoticBarriers:
    """Barriers 1 + K rho^delta / 1 - k rho^delta on a collar {rho <= sigma}.

    The validity flag is the inequality
    4(delta+1)(n-delta)/(n-2) > n A_{kappa+1} (1-lam); when it holds, K and k
    are sized so the discrete barrier residual inequalities hold node-wise
    on the collar, with the barriers worth Lam resp. lam at the sigma level.
    """
    if spec.delta is None:
        raise ValueError("asymptotic barriers need the decay weight delta")
    if not (0.0 <= lam < 1.0):
        raise ValueError(f"lambda must lie in [0, 1), got {lam}")
    if Lam <= 1.0:
        raise ValueError(f"Lambda must exceed 1, got {Lam}")
    geom = spec.geom
    n = geom.n
    kap = kappa(n)
    delta = spec.delta
    A_conv = convexity_coefficient(kap + 1.0)
    lhs = 4.0 * (delta + 1.0) * (n - delta) / (n - 2.0)
    rhs = n * A_conv * (1.0 - lam)
    margin = lhs - rhs
    if margin <= 0.0:
        return AsymptoticBarriers(math.nan, math.nan, False, margin, math.nan)

    c4 = 4.0 * (n - 1) / (n - 2)
    scal = geom.scal
    scal_hat = spec.scal_hat.values
    rho_d = geom.rho ** delta
    lap_rho_d = radial_laplacian(geom, rho_d)
    source = scal_hat - scal

    for j in range(1, geom.num_nodes - 1):
        sigma = float(geom.rho[j])
        mask = geom.rho <= sigma
        k = (1.0 - lam) / sigma ** delta
        u_minus = -k * rho_d
        r_minus = (
            -c4 * (-k * lap_rho_d)
            + (scal - (kap + 1.0) * scal_hat + A_conv * (1.0 - lam) * scal_hat) * u_minus
            - source
        )
        if float(np.max(r_minus[mask])) > 0.0:
            continue
        K = max(1.0, (Lam - 1.0) / sigma ** delta)
        ok = False
        for _ in range(60):
            u_plus = K * rho_d
            r_plus = (
                -c4 * (K * lap_rho_d)
                + (scal - (kap + 1.0) * scal_hat) * u_plus
                - source
            )
            if float(np.min(r_plus[mask])) >= 0.0:
                ok = True
                break
            K *= 2.0
        if ok:
            return AsymptoticBarriers(K, k, True, margin, sigma)
    raise BarrierError(
        "validity inequality holds but no collar level sigma admits both "
        "discrete barrier residual inequalities"
    )


@dataclass(frozen=True)
class DecayVerification:
    fit: DecayFit
    expected_delta: float
    passed: bool


def verify_decay(phi: GridFunction, expected_delta: float) -> DecayVerification:
    """Fit the decay of phi - 1 and compare with the expected weight to 5%.

    A profile identically 1 yields the zero-function marker and passes
    vacuously.
    """
    f = GridFunction(phi.geom, phi.values - 1.0)
    fit = fit_decay_rate(f)
    if math.isinf(fit.delta_hat):
        return DecayVerification(fit, expected_delta, True)
    passed = abs(fit.delta_hat - expected_delta) <= 0.05 * abs(expected_delta)
    return DecayVerification(fit, expected_delta, passed)
