"""Independent solvers and reference computations used only to check the
package's primary paths.  Nothing here is imported by the package."""

import numpy as np
from scipy.linalg import solve_banded

from ahcurv import monotone
from ahcurv.geometry import RadialGeometry
from ahcurv.grid import GridFunction


def newton_solve(problem: monotone.NonlinearProblem, phi0: np.ndarray,
                 tol: float = 1e-12, max_iter: int = 60) -> np.ndarray:
    """Damped Newton on the same discretization as the monotone engine, but
    with its own assembly and iteration (independent solver path)."""
    geom = problem.geom
    h = geom.spacing
    N = geom.num_nodes
    robin = isinstance(problem.boundary, monotone.RobinBC)
    floor_vals = problem.bracket[0].values if problem.needs_floor else None

    def residual(phi):
        r = np.zeros(N)
        lap = (phi[2:] - 2 * phi[1:-1] + phi[:-2]) / h**2 \
            + geom.H_r[1:-1] * (phi[2:] - phi[:-2]) / (2 * h)
        F = monotone.evaluate_interior(problem, phi)
        r[1:-1] = -lap - F[1:-1]
        if robin:
            dnu = (3 * phi[0] - 4 * phi[1] + phi[2]) / (2 * h)
            r[0] = dnu - monotone.evaluate_boundary(problem.boundary, float(phi[0]))
        else:
            r[0] = phi[0] - problem.boundary.value
        r[-1] = phi[-1] - problem.outer_value
        return r

    def f_slope(phi):
        out = np.zeros_like(phi)
        for term in problem.interior:
            b = term.exponent
            if b == 0.0:
                continue
            out += term.coeff.values * b * np.power(phi, b - 1.0)
        return out

    def jacobian_banded(phi):
        ab = np.zeros((4, N))  # (1 lower, 2 upper) banded storage
        # ab[row, col]: row 0 -> +2 superdiag, 1 -> +1, 2 -> diag, 3 -> -1
        ab[2, 1:-1] = 2.0 / h**2 - f_slope(phi)[1:-1]
        ab[1, 2:] = -1.0 / h**2 - geom.H_r[1:-1] / (2 * h)
        ab[3, 0:-2] = -1.0 / h**2 + geom.H_r[1:-1] / (2 * h)
        if robin:
            slope = 0.0
            for term in problem.boundary.terms:
                b = term.exponent
                if b != 0.0:
                    slope += term.coeff * b * phi[0] ** (b - 1.0)
            ab[2, 0] = 3.0 / (2 * h) - slope
            ab[1, 1] = -2.0 / h
            ab[0, 2] = 1.0 / (2 * h)
        else:
            ab[2, 0] = 1.0
            ab[1, 1] = 0.0
        ab[2, -1] = 1.0
        ab[3, -2] = 0.0
        return ab

    phi = phi0.copy()
    for _ in range(max_iter):
        r = residual(phi)
        norm = np.max(np.abs(r))
        if norm <= tol:
            return phi
        step = solve_banded((1, 2), jacobian_banded(phi), -r)
        s = 1.0
        while s > 1e-8:
            cand = phi + s * step
            if floor_vals is not None and np.any(cand <= 0.0):
                s *= 0.5
                continue
            if np.max(np.abs(residual(cand))) < norm * (1.0 - 0.25 * s) + tol:
                break
            s *= 0.5
        phi = phi + s * step
    raise AssertionError(f"newton oracle did not converge (residual {norm:.3e})")


def restrict_to_coarse(fine_values: np.ndarray, coarse_nodes: int) -> np.ndarray:
    """Values of a nested fine-grid profile at the coarse nodes; the fine
    grid must have num_nodes = k*(coarse-1)+1."""
    k = (fine_values.size - 1) // (coarse_nodes - 1)
    assert k * (coarse_nodes - 1) + 1 == fine_values.size
    return fine_values[::k]


def profile_integral_mpmath(n: int) -> float:
    """I = int_1^inf dz/sqrt(z^{kappa+2}-1) by tanh-sinh quadrature, the
    second of the two independent quadrature schemes."""
    import mpmath as mp

    p = mp.mpf(4) / (n - 2) + 2
    val = mp.quad(lambda z: 1 / mp.sqrt(z**p - 1), [1, 2, mp.inf])
    return float(val)
