import json
import math

import numpy as np
import pytest

from ahcurv import (
    GeometryKind,
    GridFunction,
    geometry_from_json,
    geometry_to_json,
    kappa,
    make_hyperbolic_exterior,
    make_toric_collar,
)
from ahcurv.geometry import (
    conformal_mean_curvature,
    conformal_radial_laplacian,
    conformal_scalar_curvature,
    make_custom,
    radial_laplacian,
)


def test_hyperbolic_mean_curvature_value(hyp3):
    # independent arithmetic: (n-1) coth(t0) = 2 cosh(1)/sinh(1)
    expected = 2.0 * math.cosh(1.0) / math.sinh(1.0)
    assert hyp3.H_r[0] == pytest.approx(expected, abs=1e-14)
    assert hyp3.H_inner == pytest.approx(2.6260705709986626, rel=1e-14)


def test_mean_curvature_limit_large_t():
    g = make_hyperbolic_exterior(4, 1.0, 30.0, 256)
    assert g.H_r[-1] == pytest.approx(3.0, abs=1e-12)


def test_builtin_scalar_curvature_constant():
    for n in (3, 4, 5):
        g = make_hyperbolic_exterior(n, 1.0, 8.0, 64)
        assert np.all(g.scal == -n * (n - 1))
        tor = make_toric_collar(n, 1.0, 8.0, 64)
        assert np.all(tor.scal == -n * (n - 1))


def test_toric_profiles():
    tor = make_toric_collar(3, 1.0, 12.0, 128)
    assert np.all(tor.H_r == 2.0)
    assert tor.rho[0] == 1.0
    tor5 = make_toric_collar(5, 2.5, 9.0, 64)
    assert tor5.H_inner == 4.0
    assert tor5.rho[0] == 2.5


def test_grid_validation_errors():
    with pytest.raises(ValueError):
        make_hyperbolic_exterior(2, 1.0, 10.0, 64)
    with pytest.raises(ValueError):
        make_hyperbolic_exterior(3, -1.0, 10.0, 64)
    with pytest.raises(ValueError):
        make_hyperbolic_exterior(3, 1.0, 0.5, 64)
    with pytest.raises(ValueError):
        make_hyperbolic_exterior(3, 1.0, 10.0, 8)
    with pytest.raises(ValueError):
        make_toric_collar(3, -1.0, 10.0, 64)


def test_geometry_arrays_are_immutable(hyp3):
    with pytest.raises(ValueError):
        hyp3.rho[0] = 2.0


def test_conformal_scalar_identity_factor(hyp3, toric3):
    for g in (hyp3, toric3):
        s = conformal_scalar_curvature(g, GridFunction.constant(g, 1.0))
        assert np.max(np.abs(s.values - g.scal)) == 0.0


def test_conformal_scalar_rejects_nonpositive(hyp3):
    phi = np.ones(hyp3.num_nodes)
    phi[5] = -0.1
    with pytest.raises(ValueError):
        conformal_scalar_curvature(hyp3, phi)


def test_n3_prefactor_and_exponent():
    assert kappa(3) == 4.0
    assert 4 * (3 - 1) / (3 - 2) == 8.0
    # constant factor c: scalhat = scal * c^{-kappa}
    g = make_hyperbolic_exterior(3, 1.0, 10.0, 128)
    c = 1.7
    s = conformal_scalar_curvature(g, GridFunction.constant(g, c))
    assert np.allclose(s.values, g.scal * c ** (-4.0), rtol=1e-13)


@pytest.mark.parametrize("delta", [1.0, 2.0])
def test_conformal_scalar_linearization(delta):
    # phi = 1 + eps rho^delta perturbs scalhat by
    # +eps (4(n-1)/(n-2)) (delta+1)(n-delta) rho^delta + O(eps^2, rho^{delta+1}),
    # from Delta rho^delta = delta(delta-n+1) rho^delta (1+O(rho)) and the
    # expansion of phi^{-kappa-1}; cross-checked by finite differences.
    # The window stays where the signal clears the eps/h^2 rounding floor.
    n = 3
    g = make_hyperbolic_exterior(n, 1.0, 12.0, 2048)
    eps = 1e-4
    phi = GridFunction(g, 1.0 + eps * g.rho**delta)
    s = conformal_scalar_curvature(g, phi)
    coeff = (4.0 * (n - 1) / (n - 2)) * (delta + 1) * (n - delta)
    window = (g.t > 4.0) & (g.t < 6.5)
    measured = (s.values[window] - g.scal[window]) / (eps * g.rho[window] ** delta)
    assert abs(np.mean(measured) - coeff) < 2e-2 * coeff
    assert np.max(np.abs(measured - coeff)) < 0.1 * coeff


def test_conformal_mean_curvature_cases(hyp3):
    assert conformal_mean_curvature(hyp3, GridFunction.constant(hyp3, 1.0)) == pytest.approx(
        hyp3.H_inner, abs=1e-14
    )
    c = 2.0
    kap = kappa(3)
    assert conformal_mean_curvature(hyp3, GridFunction.constant(hyp3, c)) == pytest.approx(
        c ** (-kap / 2) * hyp3.H_inner, rel=1e-14
    )
    # phi(t0) = 1, phi'(t0) = 1: Hhat = 2 coth(1) + 4 (gradient coefficient
    # 2(n-1)/(n-2) = 4); the one-sided stencil is exact on linear profiles
    phi = GridFunction(hyp3, 1.0 + (hyp3.t - 1.0))
    expected = 2.0 / math.tanh(1.0) + 4.0
    assert conformal_mean_curvature(hyp3, phi) == pytest.approx(expected, rel=1e-13)


def test_conformal_scalar_discretization_order():
    # against the exact curvature of phi^kappa g for phi = 1 + rho:
    # second-order convergence of the interior error
    n = 3
    errs = []
    for N in (128, 256, 512):
        g = make_hyperbolic_exterior(n, 1.0, 8.0, N)
        phi = 1.0 + g.rho
        # exact: Delta rho = (1 - (n-1) coth t) rho for rho = e^{-t}
        lap_exact = (1.0 - g.H_r) * g.rho
        exact = phi ** (-5.0) * (-8.0 * lap_exact + g.scal * phi)
        s = conformal_scalar_curvature(g, GridFunction(g, phi))
        errs.append(np.max(np.abs(s.values[1:-1] - exact[1:-1])))
    assert math.log2(errs[0] / errs[1]) == pytest.approx(2.0, abs=0.25)
    assert math.log2(errs[1] / errs[2]) == pytest.approx(2.0, abs=0.25)


def test_conformal_composition(hyp3_long):
    # rescaling by phi1 then phi2 equals rescaling by phi1*phi2 within O(h^2)
    g = hyp3_long
    n, kap = g.n, kappa(g.n)
    phi1 = 1.0 + 0.3 * g.rho
    phi2 = 1.0 + 0.2 * g.rho**2
    s1 = conformal_scalar_curvature(g, GridFunction(g, phi1))
    lap2 = conformal_radial_laplacian(g, phi1, phi2)
    s12 = phi2 ** (-kap - 1.0) * (-(4 * (n - 1) / (n - 2)) * lap2 + s1.values * phi2)
    direct = conformal_scalar_curvature(g, GridFunction(g, phi1 * phi2))
    err = np.max(np.abs(s12[2:-2] - direct.values[2:-2]))
    assert err < 20.0 * g.spacing**2


def test_discrete_laplacian_of_power_law():
    # Delta rho^delta = delta (delta - n + 1) rho^delta (1 + O(rho)) far out
    n, delta = 3, 1.5
    g = make_hyperbolic_exterior(n, 1.0, 12.0, 1024)
    lap = radial_laplacian(g, g.rho**delta)
    expected = delta * (delta - n + 1) * g.rho**delta
    tail = g.t > 8.0
    rel = np.abs(lap[tail][:-1] - expected[tail][:-1]) / g.rho[tail][:-1] ** delta
    # the correction term is delta * rho^{delta+1} * coefficient, O(rho)
    assert np.max(rel) < 5.0 * np.max(g.rho[tail]) + 10.0 * g.spacing**2


def test_json_round_trip(hyp3, toric3):
    for g in (hyp3, toric3):
        doc = json.loads(geometry_to_json(g))
        assert set(doc) == {"n", "kind", "t", "rho", "H_r", "scal"}
        back = geometry_from_json(geometry_to_json(g))
        assert back.kind == g.kind
        assert np.array_equal(back.t, g.t)
        assert np.array_equal(back.rho, g.rho)
        assert np.array_equal(back.H_r, g.H_r)
        assert np.array_equal(back.scal, g.scal)
        assert geometry_to_json(back) == geometry_to_json(g)


def test_custom_geometry_log_warp():
    base = make_hyperbolic_exterior(3, 1.0, 10.0, 256)
    custom = make_custom(3, base.t, base.rho, base.H_r,
                         -6.0 * (1.0 + base.rho**2),
                         angular_scal=2.0)
    assert custom.kind is GeometryKind.CUSTOM
    # trapezoid reconstruction of log q matches log sinh up to a constant
    diff = custom.log_warp - (np.log(np.sinh(base.t)) - np.log(np.sinh(base.t[0])))
    assert np.max(np.abs(diff)) < 5.0 * base.spacing**2
