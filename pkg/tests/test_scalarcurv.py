import math

import numpy as np
import pytest

from ahcurv import GridFunction, make_hyperbolic_exterior, make_toric_collar
from ahcurv.errors import BarrierError
from ahcurv.geometry import (
    conformal_mean_curvature,
    conformal_scalar_curvature,
    inner_normal_derivative,
)
from ahcurv.scalarcurv import (
    AsymptoticBarriers,
    DirichletBoundary,
    MeanCurvatureBoundary,
    PrescriptionSpec,
    asymptotic_barriers,
    convexity_coefficient,
    solve_prescription,
    subsolution_sigma,
    verify_decay,
)
from oracles import newton_solve, restrict_to_coarse


def bisect(f, lo, hi, iters=200):
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(mid) <= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_spec_validation(hyp3):
    with pytest.raises(ValueError):
        PrescriptionSpec(hyp3, GridFunction.constant(hyp3, 1.0), DirichletBoundary(1.0))
    with pytest.raises(ValueError):
        PrescriptionSpec(hyp3, GridFunction.constant(hyp3, -6.0), DirichletBoundary(-1.0))
    with pytest.raises(ValueError):
        PrescriptionSpec(hyp3, GridFunction.constant(hyp3, -6.0), MeanCurvatureBoundary(-0.5))
    with pytest.raises(ValueError) as err:
        PrescriptionSpec(hyp3, GridFunction.constant(hyp3, -6.0), DirichletBoundary(1.0),
                         delta=3.5)
    assert "mass obstruction" in str(err.value)


def test_sigma_equal_curvatures(hyp3):
    spec = PrescriptionSpec(hyp3, GridFunction.constant(hyp3, -6.0), DirichletBoundary(1.0))
    sigma, phi_sigma = subsolution_sigma(spec)
    assert sigma <= 1.0
    assert sigma == hyp3.rho[0]  # ratio == 1: every capped grid value admissible
    assert np.all(phi_sigma.values == np.maximum(sigma - hyp3.rho, 0.0))
    # vanishes on {rho >= sigma}
    assert np.all(phi_sigma.values[hyp3.rho >= sigma] == 0.0)


def test_sigma_against_bisection_oracle():
    # scal_hat = -n(n-1)(1+rho), n=3: admissibility is sigma^4 (1+sigma) <= 1.
    # Oracle: bisection on the same scalar equation.
    root = bisect(lambda s: s**4 * (1 + s) - 1.0, 0.5, 1.0)
    assert root == pytest.approx(0.8566748838545029, abs=1e-12)
    # toric collar with A = 2 puts grid values on both sides of the root
    geom = make_toric_collar(3, 2.0, 12.0, 512)
    spec = PrescriptionSpec(
        geom, GridFunction(geom, -6.0 * (1.0 + geom.rho)), DirichletBoundary(1.0)
    )
    sigma, _ = subsolution_sigma(spec)
    assert sigma <= root + 1e-12
    # largest admissible grid value: the next bigger grid value must violate
    bigger = geom.rho[geom.rho > sigma]
    candidates = bigger[bigger <= 1.0]
    assert np.all(candidates**4 * (1.0 + candidates) > 1.0)


def test_sigma_failure_reported():
    geom = make_hyperbolic_exterior(3, 1.0, 10.0, 256)
    # target blowing up near infinity: scal/scal_hat ~ rho^5 shrinks faster
    # than sigma^kappa can follow, so no grid value is admissible
    spec = PrescriptionSpec(geom, GridFunction(geom, -6.0 * (1.0 + geom.rho**-5.0)),
                            DirichletBoundary(1.0))
    with pytest.raises(BarrierError) as err:
        subsolution_sigma(spec)
    assert "sigma" in str(err.value)


def test_convexity_coefficient_values():
    assert convexity_coefficient(5.0) == 10.0  # n=3: max{5, 10}
    assert convexity_coefficient(3.0) == 3.0   # n=4: max{3, 3}
    assert convexity_coefficient(2.0) == 2.0


@pytest.mark.parametrize("n", range(3, 11))
def test_convexity_inequality_dense(n):
    # (1+u)^{kappa+1} - 1 - (kappa+1)u <= A_{kappa+1} u^2 on u in [-1, 0]
    kap = 4.0 / (n - 2)
    p = kap + 1.0
    A = convexity_coefficient(p)
    u = np.linspace(-1.0, 0.0, 20001)
    lhs = (1.0 + u) ** p - 1.0 - p * u
    assert np.max(lhs - A * u**2) <= 1e-12


def test_barrier_validity_worked_examples(hyp3):
    # n=3, delta=1: LHS = 16; lambda -> 1 makes RHS -> 0
    spec = PrescriptionSpec(hyp3, GridFunction.constant(hyp3, -6.0),
                            DirichletBoundary(1.0), delta=1.0)
    out = asymptotic_barriers(spec, lam=1.0 - 1e-12, Lam=2.0)
    assert out.valid and out.margin == pytest.approx(16.0, abs=1e-9)
    # n=3, delta=1, lambda=0: 16 > 30 is false
    out0 = asymptotic_barriers(spec, lam=0.0, Lam=2.0)
    assert not out0.valid
    assert out0.margin == pytest.approx(16.0 - 30.0, abs=1e-12)
    # n=4, delta=2, lambda=0.9: LHS = 12 > 1.2
    g4 = make_hyperbolic_exterior(4, 1.0, 10.0, 256)
    spec4 = PrescriptionSpec(g4, GridFunction.constant(g4, -12.0),
                             DirichletBoundary(1.0), delta=2.0)
    out4 = asymptotic_barriers(spec4, lam=0.9, Lam=2.0)
    assert out4.valid
    assert out4.margin == pytest.approx(12.0 - 1.2, abs=1e-12)


def test_barriers_are_discrete_barriers(hyp3_long):
    # when valid, the returned K and k make the collar residual inequalities
    # hold; spot-check the pinning K >= (Lam-1)/sigma^delta
    g = hyp3_long
    spec = PrescriptionSpec(g, GridFunction(g, -6.0 * (1.0 + g.rho**2)),
                            DirichletBoundary(1.0), delta=2.0)
    out = asymptotic_barriers(spec, lam=0.9, Lam=2.0)
    assert out.valid
    assert out.K >= (2.0 - 1.0) / out.sigma**2.0 - 1e-12
    assert out.k == pytest.approx((1.0 - 0.9) / out.sigma**2.0, rel=1e-12)


def test_trivial_prescription(hyp3):
    spec = PrescriptionSpec(hyp3, GridFunction.constant(hyp3, -6.0), DirichletBoundary(1.0))
    phi, report = solve_prescription(spec, tol=1e-12)
    assert np.max(np.abs(phi.values - 1.0)) <= 1e-10
    assert report.converged


def test_prescription_against_newton_oracle(hyp3_long):
    from ahcurv import monotone

    g = hyp3_long
    tol = 1e-12
    spec = PrescriptionSpec(g, GridFunction(g, -6.0 * (1.0 + g.rho**2)),
                            DirichletBoundary(1.0), delta=2.0)
    phi, _ = solve_prescription(spec, tol=tol)
    # independent damped-Newton solve of the same discrete system
    c1 = 1.0 / 8.0
    problem = monotone.NonlinearProblem(
        g,
        [monotone.ReactionTerm(GridFunction(g, -c1 * g.scal), 1.0),
         monotone.ReactionTerm(GridFunction(g, c1 * spec.scal_hat.values), 5.0)],
        monotone.DirichletBC(1.0),
        1.0,
        (GridFunction.constant(g, 0.0), GridFunction.constant(g, 2.0)),
    )
    oracle = newton_solve(problem, np.ones(g.num_nodes), tol=1e-10)
    assert np.max(np.abs(phi.values - oracle)) <= 5.0 * g.spacing**2
    assert np.max(np.abs(phi.values - oracle)) <= 1e-8


def test_recovered_curvature_matches_target(hyp3_long):
    g = hyp3_long
    spec = PrescriptionSpec(g, GridFunction(g, -6.0 * (1.0 + g.rho**2)),
                            DirichletBoundary(1.0), delta=2.0)
    phi, _ = solve_prescription(spec, tol=1e-12)
    recovered = conformal_scalar_curvature(g, phi)
    err = np.abs(recovered.values[1:-1] - spec.scal_hat.values[1:-1])
    assert np.max(err) <= 5.0 * g.spacing**2


def test_uniqueness_two_brackets(hyp3_long):
    from ahcurv import monotone

    g = hyp3_long
    tol = 1e-12
    spec = PrescriptionSpec(g, GridFunction(g, -6.0 * (1.0 + g.rho**2)),
                            DirichletBoundary(1.0))
    phi1, rep1 = solve_prescription(spec, tol=tol)
    # a different admissible bracket: zero floor and a larger ceiling; its
    # larger monotonicity constant loosens the residual stopping rule
    # tol*A, so its tolerance is scaled down to reach the same accuracy
    c1 = 1.0 / 8.0
    problem = monotone.NonlinearProblem(
        g,
        [monotone.ReactionTerm(GridFunction(g, -c1 * g.scal), 1.0),
         monotone.ReactionTerm(GridFunction(g, c1 * spec.scal_hat.values), 5.0)],
        monotone.DirichletBC(1.0),
        1.0,
        (GridFunction.constant(g, 0.0), GridFunction.constant(g, 2.0)),
    )
    tol2 = tol * rep1.A_used / monotone.choose_A(problem)
    phi2, _ = monotone.iterate(problem, tol=tol2)
    assert np.max(np.abs(phi1.values - phi2.values)) <= 10.0 * tol


def test_round_trip_resolve(hyp3_long):
    g = hyp3_long
    tol = 1e-12
    spec = PrescriptionSpec(g, GridFunction(g, -6.0 * (1.0 + g.rho**2)),
                            DirichletBoundary(1.0))
    phi1, _ = solve_prescription(spec, tol=tol)
    recovered = conformal_scalar_curvature(g, phi1)
    # recompute curvature from phi, re-solve with it as the new target
    respec = PrescriptionSpec(g, recovered, DirichletBoundary(1.0))
    phi2, _ = solve_prescription(respec, tol=tol)
    assert np.max(np.abs(phi1.values - phi2.values)) <= 10.0 * tol


def test_solution_positive_and_above_cone(hyp3_long):
    g = hyp3_long
    spec = PrescriptionSpec(g, GridFunction(g, -6.0 * (1.0 + g.rho)), DirichletBoundary(0.5))
    sigma, phi_sigma = subsolution_sigma(spec)
    phi, _ = solve_prescription(spec, tol=1e-11)
    assert np.all(phi.values > 0.0)
    assert np.all(phi.values >= phi_sigma.values - 1e-10)


@pytest.mark.parametrize("n,delta,T", [(3, 2.0, 14.0), (4, 3.0, 11.0)])
def test_decay_fit_against_fine_oracle(n, delta, T):
    # delta_hat within 5% of delta, and consistent with a 4x-resolution solve
    coarse = 512
    fits = {}
    for N in (coarse, 4 * (coarse - 1) + 1):
        g = make_hyperbolic_exterior(n, 1.0, T, N)
        spec = PrescriptionSpec(
            g, GridFunction(g, -float(n * (n - 1)) * (1.0 + g.rho**delta)),
            DirichletBoundary(1.0), delta,
        )
        phi, _ = solve_prescription(spec, tol=1e-11)
        fits[N] = (verify_decay(phi, delta), phi)
    for N, (check, _) in fits.items():
        assert check.passed, f"N={N}: {check.fit}"
    fine = fits[4 * (coarse - 1) + 1][1]
    coarse_phi = fits[coarse][1]
    agreement = np.max(np.abs(coarse_phi.values - restrict_to_coarse(fine.values, coarse)))
    g = make_hyperbolic_exterior(n, 1.0, T, coarse)
    assert agreement <= 5.0 * g.spacing**2


def test_verify_decay_trivial_marker(hyp3):
    check = verify_decay(GridFunction.constant(hyp3, 1.0), 2.0)
    assert math.isinf(check.fit.delta_hat)
    assert check.passed


def test_mean_curvature_identity_case(hyp3):
    # Hhat = conformal_mean_curvature(geom, 1) = H_inner with scal_hat = scal
    # has phi == 1 as its exact solution
    H_hat = conformal_mean_curvature(hyp3, GridFunction.constant(hyp3, 1.0))
    spec = PrescriptionSpec(hyp3, GridFunction.constant(hyp3, -6.0),
                            MeanCurvatureBoundary(H_hat))
    phi, _ = solve_prescription(spec, tol=1e-12)
    assert np.max(np.abs(phi.values - 1.0)) <= 1e-10
    assert conformal_mean_curvature(hyp3, phi) == pytest.approx(H_hat, abs=1e-8)


def test_mean_curvature_nontrivial_solves_displayed_equation(hyp3):
    # the imposed relation is (2/(n-1)) d_nu phi - H phi = -Hhat phi^{kappa/2+1}
    n, H_hat = 3, 1.5
    spec = PrescriptionSpec(hyp3, GridFunction.constant(hyp3, -6.0),
                            MeanCurvatureBoundary(H_hat))
    phi, _ = solve_prescription(spec, tol=1e-11)
    phi0 = phi.values[0]
    residual = (
        (2.0 / (n - 1)) * inner_normal_derivative(hyp3, phi.values)
        - hyp3.H_inner * phi0
        + H_hat * phi0 ** 3.0
    )
    assert abs(residual) <= 1e-8
    assert np.all(phi.values > 0)


def test_mean_curvature_zero_target_rejected_on_positive_H(hyp3):
    spec = PrescriptionSpec(hyp3, GridFunction.constant(hyp3, -6.0),
                            MeanCurvatureBoundary(0.0))
    with pytest.raises(BarrierError):
        solve_prescription(spec)
