"""Discrete linear Robin problem on a radial geometry.

Solves  -Delta u + A u = g  with the Robin condition  d_nu u + A u = h  at
the inner boundary (nu the outward normal, d_nu u = -u'(t0)) and a Dirichlet
value at the outer truncation node.

Interior rows use the standard second-order stencil

  -[(u_{i+1} - 2 u_i + u_{i-1})/h^2 + H_r(t_i) (u_{i+1} - u_{i-1})/(2h)] + A u_i = g_i,

the inner row the one-sided second-order stencil

  (3 u_0 - 4 u_1 + u_2)/(2h) + A u_0 = h,

whose u_2 entry is eliminated against interior row 1 so the system stays
tridiagonal.  Assembly verifies the M-matrix property (positive diagonal,
non-positive off-diagonals, strictly positive row sums); this is what makes
the discrete maximum principle -- the stand-in for the continuum generalized
maximum principle -- hold exactly:  g >= 0, h >= 0, u_outer >= 0 imply
u >= 0 at every node.

The sign conditions require  h * max|H_r| / 2 < 1  (else the interior
off-diagonals change sign) and  A <= 2/h^2 + 2 H_r(t_1)/h  (else the
eliminated boundary row does); both are diagnosed with the required
refinement.  Any A > 0 is admissible once the grid is fine enough.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import CoarseGridError
from .geometry import RadialGeometry
from .grid import GridFunction

__all__ = [
    "LinearRobinProblem",
    "TridiagonalSystem",
    "RobinOperator",
    "DirichletOperator",
    "assemble",
    "solve",
    "admissible_A_range",
    "min_admissible_A",
]

_RESIDUAL_REL_TOL = 1e-12


@dataclass(frozen=True)
class LinearRobinProblem:
    geom: RadialGeometry
    A: float
    g: GridFunction
    h: float
    u_outer: float

    def __post_init__(self):
        if self.A <= 0:
            raise ValueError(
                f"zeroth-order coefficient A must be positive, got {self.A}; "
                "any positive value is admissible on a fine enough grid"
            )
        if self.g.geom is not self.geom:
            raise ValueError("right-hand side lives on a different geometry")


@dataclass
class TridiagonalSystem:
    """Rows  lower[i-1] u_{i-1} + diag[i] u_i + upper[i] u_{i+1} = rhs[i]."""

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray

    def solve(self) -> np.ndarray:
        m = self.diag.size
        ab = np.zeros((3, m))
        ab[0, 1:] = self.upper
        ab[1, :] = self.diag
        ab[2, :-1] = self.lower
        return solve_banded((1, 1), ab, self.rhs)


def admissible_A_range(geom: RadialGeometry) -> tuple:
    """(A_min, A_max) keeping the assembled matrix an M-matrix; A_min is an
    open bound (any positive A works)."""
    h = geom.spacing
    max_H = float(np.max(np.abs(geom.H_r)))
    if h * max_H / 2 >= 1:
        required = 2.0 / max_H
        needed_nodes = int(np.ceil((geom.t[-1] - geom.t[0]) / required)) + 2
        raise CoarseGridError(
            f"grid too coarse for the discrete maximum principle: spacing h={h:.6g} "
            f"violates h*max|H_r|/2 < 1 (max|H_r|={max_H:.6g}); "
            f"need h < {required:.6g}, i.e. at least {needed_nodes} nodes"
        )
    A_max = 2.0 / h**2 + 2.0 * geom.H_r[1] / h
    return 0.0, float(A_max)


def min_admissible_A(geom: RadialGeometry) -> float:
    """Smallest zeroth-order coefficient keeping the matrix an M-matrix
    (open bound; raises CoarseGridError when no A works at this spacing)."""
    return admissible_A_range(geom)[0]


class _BaseOperator:
    """Shared interior assembly for the Robin and Dirichlet variants."""

    def __init__(self, geom: RadialGeometry, A: float):
        if A <= 0:
            raise ValueError(f"A must be positive, got {A}")
        a_min, a_max = admissible_A_range(geom)  # raises on coarse grids
        if A > a_max:
            raise CoarseGridError(
                f"A={A:.6g} exceeds the admissible bound {a_max:.6g} at spacing "
                f"h={geom.spacing:.6g}; refine the grid"
            )
        self.geom = geom
        self.A = float(A)
        h = geom.spacing
        self.h = h
        H = geom.H_r
        N = geom.num_nodes
        self.lower = np.zeros(N - 1)
        self.diag = np.zeros(N)
        self.upper = np.zeros(N - 1)
        # interior rows 1..N-2
        self.lower[: N - 2] = -1.0 / h**2 + H[1:-1] / (2 * h)
        self.diag[1:-1] = 2.0 / h**2 + A
        self.upper[1:] = -1.0 / h**2 - H[1:-1] / (2 * h)
        # outer Dirichlet row
        self.diag[-1] = 1.0
        self.lower[-1] = 0.0

    def _check_m_matrix(self):
        tol = 1e-12 / self.h**2
        if np.any(self.diag <= 0):
            raise CoarseGridError("assembled diagonal is not positive")
        if np.any(self.lower > tol) or np.any(self.upper > tol):
            raise CoarseGridError(
                "assembled off-diagonals change sign; grid too coarse for the "
                "discrete maximum principle"
            )
        row_sums = self.diag.copy()
        row_sums[:-1] += self.upper
        row_sums[1:] += self.lower
        if np.any(row_sums <= tol * self.h**2):
            raise CoarseGridError("assembled matrix is not strictly diagonally dominant")

    def _finish_solve(self, system: TridiagonalSystem) -> np.ndarray:
        u = system.solve()
        resid = system.diag * u - system.rhs
        resid[:-1] += system.upper * u[1:]
        resid[1:] += system.lower * u[:-1]
        scale = max(
            1.0,
            float(np.max(np.abs(system.rhs))),
            float(np.max(np.abs(u))) * float(np.max(np.abs(system.diag))),
        )
        rel = float(np.max(np.abs(resid))) / scale
        if rel > _RESIDUAL_REL_TOL:
            # cannot occur under the M-matrix condition
            raise ArithmeticError(f"tridiagonal solve residual {rel:.3e} exceeds 1e-12")
        return u


class RobinOperator(_BaseOperator):
    """Reusable assembly of the Robin-boundary system for fixed (geom, A)."""

    def __init__(self, geom: RadialGeometry, A: float):
        super().__init__(geom, A)
        h = self.h
        # raw boundary row (3u0 - 4u1 + u2)/(2h) + A u0 = h_bc
        alpha0 = 3.0 / (2 * h) + A
        alpha1 = -2.0 / h
        alpha2 = 1.0 / (2 * h)
        # interior row at i=1 used to eliminate the u2 entry
        beta0 = -1.0 / h**2 + geom.H_r[1] / (2 * h)
        beta1 = 2.0 / h**2 + A
        beta2 = -1.0 / h**2 - geom.H_r[1] / (2 * h)
        self._elim = alpha2 / beta2  # negative under the M-matrix condition
        self.diag[0] = alpha0 - self._elim * beta0
        self.upper[0] = alpha1 - self._elim * beta1
        self._check_m_matrix()

    def system(self, g_values, h_bc, u_outer) -> TridiagonalSystem:
        rhs = np.asarray(g_values, dtype=float).copy()
        rhs[0] = h_bc - self._elim * rhs[1]
        rhs[-1] = u_outer
        return TridiagonalSystem(self.lower, self.diag, self.upper, rhs)

    def solve_values(self, g_values, h_bc, u_outer) -> np.ndarray:
        return self._finish_solve(self.system(g_values, h_bc, u_outer))


class DirichletOperator(_BaseOperator):
    """Same interior operator with a Dirichlet value at the inner boundary."""

    def __init__(self, geom: RadialGeometry, A: float):
        super().__init__(geom, A)
        self.diag[0] = 1.0
        self.upper[0] = 0.0
        self._check_m_matrix()

    def system(self, g_values, u_inner, u_outer) -> TridiagonalSystem:
        rhs = np.asarray(g_values, dtype=float).copy()
        rhs[0] = u_inner
        rhs[-1] = u_outer
        return TridiagonalSystem(self.lower, self.diag, self.upper, rhs)

    def solve_values(self, g_values, u_inner, u_outer) -> np.ndarray:
        return self._finish_solve(self.system(g_values, u_inner, u_outer))


def assemble(problem: LinearRobinProblem) -> TridiagonalSystem:
    """Assembled tridiagonal system (boundary u2 entry already eliminated)."""
    op = RobinOperator(problem.geom, problem.A)
    return op.system(problem.g.values, problem.h, problem.u_outer)


def solve(problem: LinearRobinProblem) -> GridFunction:
    op = RobinOperator(problem.geom, problem.A)
    return GridFunction(problem.geom, op.solve_values(problem.g.values, problem.h, problem.u_outer))
