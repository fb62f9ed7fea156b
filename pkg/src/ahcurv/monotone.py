"""Monotone sub/super-solution iteration for radial semilinear problems.

Solves  -Delta phi = F(p, phi)  with  F(p, phi) = sum_i a_i(p) phi^{beta_i},
an inner boundary condition that is either a fixed Dirichlet value or the
nonlinear Robin relation  d_nu phi = f(p, phi) = sum_j c_j phi^{gamma_j},
and a pinned Dirichlet value at the outer truncation node.

Given a bracket phi_- <= phi_+ of sub/super-solutions, a constant A is
picked large enough that  phi -> A phi + F(p, phi)  and
phi -> A phi + f(p, phi)  are nondecreasing on [min phi_-, max phi_+]; the
sequence then starts at phi_0 = phi_+ and each step solves the linear
problem

  -Delta phi + A phi = A phi_i + F(p, phi_i)
  d_nu  phi + A phi = A phi_i + f(p, phi_i)     (Robin case)

through the M-matrix discretization of :mod:`ahcurv.linsolve`.  The iterates
decrease node-wise and stay above phi_-; both properties are enforced up to
a 1e-10 arithmetic slack, and a violation beyond that signals a wrong
barrier or a grid too coarse to respect the barrier's kinks.

The sub/super-solution sign checks before the run are warnings rather than
errors: the barriers used upstream (truncated-cone and glued-ODE profiles)
are only distributional sub/super-solutions, so their node-wise residual
sign is unreliable at kink nodes.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import linsolve
from .errors import BracketError, IterationLimitError
from .geometry import RadialGeometry, inner_normal_derivative, radial_laplacian
from .grid import GridFunction

__all__ = [
    "ReactionTerm",
    "BoundaryReaction",
    "DirichletBC",
    "RobinBC",
    "NonlinearProblem",
    "IterationReport",
    "choose_A",
    "iterate",
    "nonlinear_residual",
]

logger = logging.getLogger(__name__)

BRACKET_SLACK = 1e-10
_SAMPLE_POINTS = 1024


@dataclass(frozen=True)
class ReactionTerm:
    """One interior power term a(p) * phi^beta."""

    coeff: GridFunction
    exponent: float


@dataclass(frozen=True)
class BoundaryReaction:
    """One boundary power term c * phi^gamma (c evaluated at the inner
    boundary; boundary data is constant under the radial symmetry)."""

    coeff: float
    exponent: float


@dataclass(frozen=True)
class DirichletBC:
    value: float


@dataclass(frozen=True)
class RobinBC:
    terms: tuple

    def __init__(self, terms):
        object.__setattr__(self, "terms", tuple(terms))


@dataclass(frozen=True)
class NonlinearProblem:
    geom: RadialGeometry
    interior: tuple
    boundary: object  # DirichletBC | RobinBC
    outer_value: float
    bracket: tuple  # (phi_minus, phi_plus)

    def __init__(self, geom, interior, boundary, outer_value, bracket):
        object.__setattr__(self, "geom", geom)
        object.__setattr__(self, "interior", tuple(interior))
        object.__setattr__(self, "boundary", boundary)
        object.__setattr__(self, "outer_value", float(outer_value))
        object.__setattr__(self, "bracket", (bracket[0], bracket[1]))
        self._validate()

    def _validate(self):
        phi_minus, phi_plus = self.bracket
        for side in (phi_minus, phi_plus):
            if side.geom is not self.geom:
                raise ValueError("bracket grid functions live on a different geometry")
        if np.any(phi_minus.values > phi_plus.values):
            raise ValueError("bracket is not ordered: phi_minus must be <= phi_plus node-wise")
        exponents = [term.exponent for term in self.interior]
        if isinstance(self.boundary, RobinBC):
            exponents += [term.exponent for term in self.boundary.terms]
        needs_floor = any(b != 0.0 and b < 1.0 for b in exponents)
        if needs_floor and float(np.min(phi_minus.values)) <= 0.0:
            raise ValueError(
                "reactions with exponents below 1 require a strictly positive "
                "bracket floor (a-priori positivity)"
            )
        if not (self.outer_value <= float(phi_plus.values[-1]) + BRACKET_SLACK
                and self.outer_value >= float(phi_minus.values[-1]) - BRACKET_SLACK):
            raise ValueError("outer Dirichlet value lies outside the bracket")
        if isinstance(self.boundary, DirichletBC):
            v = self.boundary.value
            if not (phi_minus.values[0] - BRACKET_SLACK <= v <= phi_plus.values[0] + BRACKET_SLACK):
                raise ValueError("inner Dirichlet value lies outside the bracket")

    @property
    def needs_floor(self) -> bool:
        exponents = [term.exponent for term in self.interior]
        if isinstance(self.boundary, RobinBC):
            exponents += [t.exponent for t in self.boundary.terms]
        return any(b != 0.0 and b < 1.0 for b in exponents)


@dataclass
class IterationReport:
    iterations: int = 0
    residual_history: list = field(default_factory=list)
    sup_diff_history: list = field(default_factory=list)
    bracket_violation: float = 0.0
    A_used: float = 0.0
    converged: bool = False

    @property
    def final_residual(self) -> float:
        return self.residual_history[-1] if self.residual_history else float("nan")

    def to_json_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "residual_history": [float(r) for r in self.residual_history],
            "sup_diff_history": [float(s) for s in self.sup_diff_history],
            "bracket_violation": float(self.bracket_violation),
            "A_used": float(self.A_used),
            "converged": self.converged,
        }


def evaluate_interior(problem: NonlinearProblem, phi_values: np.ndarray) -> np.ndarray:
    """F(p, phi) node-wise."""
    out = np.zeros_like(phi_values)
    for term in problem.interior:
        if term.exponent == 0.0:
            out += term.coeff.values
        elif term.exponent == 1.0:
            out += term.coeff.values * phi_values
        else:
            out += term.coeff.values * np.power(phi_values, term.exponent)
    return out


def evaluate_boundary(boundary: RobinBC, phi0: float) -> float:
    """f(p, phi) at the inner boundary node."""
    total = 0.0
    for term in boundary.terms:
        if term.exponent == 0.0:
            total += term.coeff
        else:
            total += term.coeff * phi0 ** term.exponent
    return total


def choose_A(problem: NonlinearProblem) -> float:
    """Monotonicity constant: 1.1 x the largest slope -dF/dphi (and -df/dphi)
    over a dense sample of [min phi_-, max phi_+], floored at 1 and at the
    linsolve admissibility minimum."""
    phi_minus, phi_plus = problem.bracket
    lam = float(np.min(phi_minus.values))
    big = float(np.max(phi_plus.values))
    if big < lam:
        raise ValueError(f"degenerate bracket: [{lam}, {big}]")
    xs = np.linspace(lam, big, _SAMPLE_POINTS)
    worst = 0.0
    if problem.interior:
        slope = np.zeros((problem.geom.num_nodes, xs.size))
        for term in problem.interior:
            b = term.exponent
            if b == 0.0:
                continue
            slope += term.coeff.values[:, None] * b * np.power(xs[None, :], b - 1.0)
        worst = max(worst, float(np.max(-slope)))
    if isinstance(problem.boundary, RobinBC) and problem.boundary.terms:
        slope_b = np.zeros_like(xs)
        for term in problem.boundary.terms:
            b = term.exponent
            if b == 0.0:
                continue
            slope_b += term.coeff * b * np.power(xs, b - 1.0)
        worst = max(worst, float(np.max(-slope_b)))
    A_monotone = 1.1 * worst
    A_matrix = linsolve.min_admissible_A(problem.geom)
    return max(1.0, A_monotone, A_matrix)


def nonlinear_residual(problem: NonlinearProblem, phi_values: np.ndarray) -> float:
    """Sup of the discrete interior residual -Delta phi - F and, in the Robin
    case, the discrete boundary residual d_nu phi - f."""
    interior = -radial_laplacian(problem.geom, phi_values) - evaluate_interior(problem, phi_values)
    worst = float(np.max(np.abs(interior[1:-1])))
    if isinstance(problem.boundary, RobinBC):
        bres = inner_normal_derivative(problem.geom, phi_values) - evaluate_boundary(
            problem.boundary, float(phi_values[0])
        )
        worst = max(worst, abs(bres))
    return worst


def _warn_barrier_signs(problem: NonlinearProblem):
    geom = problem.geom
    h2 = geom.spacing ** 2
    phi_minus, phi_plus = problem.bracket
    for sign, side, name in ((-1.0, phi_plus, "super"), (+1.0, phi_minus, "sub")):
        vals = side.values
        f_vals = evaluate_interior(problem, vals)
        resid = -radial_laplacian(geom, vals) - f_vals
        slack = 10.0 * h2 * (1.0 + float(np.max(np.abs(f_vals))))
        # super-solution wants resid >= -slack, sub-solution resid <= +slack
        bad = float(np.max(sign * resid[1:-1]))
        if bad > slack:
            warnings.warn(
                f"{name}-solution interior residual has the wrong sign by {bad:.3e} "
                f"(slack {slack:.3e}); barriers may only hold distributionally",
                RuntimeWarning,
                stacklevel=3,
            )
        if isinstance(problem.boundary, RobinBC):
            bres = inner_normal_derivative(geom, vals) - evaluate_boundary(
                problem.boundary, float(vals[0])
            )
            if sign * bres > slack:
                warnings.warn(
                    f"{name}-solution boundary residual has the wrong sign by "
                    f"{sign * bres:.3e}",
                    RuntimeWarning,
                    stacklevel=3,
                )


def iterate(problem: NonlinearProblem, tol: float = 1e-10, max_iter: int = 100_000,
            A: float = None):
    """Run the decreasing iteration from phi_+; returns (solution, report).

    Stops when both the successive sup-difference and the nonlinear residual
    are below tolerance (the residual scaled by A, since each linear step
    perturbs the equation by A times the step size).  A defaults to
    choose_A(problem); any admissible override yields the same limit.
    """
    geom = problem.geom
    phi_minus, phi_plus = problem.bracket
    if A is None:
        A = choose_A(problem)
    elif A < choose_A(problem) / 1.1:
        raise ValueError(f"A={A} is below the monotonicity threshold")
    _warn_barrier_signs(problem)

    robin = isinstance(problem.boundary, RobinBC)
    if robin:
        op = linsolve.RobinOperator(geom, A)
    else:
        op = linsolve.DirichletOperator(geom, A)

    report = IterationReport(A_used=A)
    floor = phi_minus.values if problem.needs_floor else None
    phi = phi_plus.values.copy()
    logger.debug("monotone iteration: A=%.6g tol=%.3g max_iter=%d", A, tol, max_iter)

    for it in range(1, max_iter + 1):
        phi_eval = np.maximum(phi, floor) if floor is not None else phi
        g = A * phi_eval + evaluate_interior(problem, phi_eval)
        if robin:
            h_bc = A * phi_eval[0] + evaluate_boundary(problem.boundary, float(phi_eval[0]))
            new = op.solve_values(g, h_bc, problem.outer_value)
        else:
            new = op.solve_values(g, problem.boundary.value, problem.outer_value)

        up = float(np.max(new - phi))
        down = float(np.max(phi_minus.values - new))
        report.bracket_violation = max(report.bracket_violation, up, down, 0.0)
        report.iterations = it
        sup_diff = float(np.max(np.abs(new - phi)))
        report.sup_diff_history.append(sup_diff)
        if up > BRACKET_SLACK or down > BRACKET_SLACK:
            raise BracketError(
                f"iterate {it} violated the bracket by {max(up, down):.3e} "
                f"(> {BRACKET_SLACK:.0e}); the barrier is wrong or the grid too coarse",
                report=report,
            )
        phi = new
        new_eval = np.maximum(new, floor) if floor is not None else new
        resid = nonlinear_residual(problem, new_eval)
        report.residual_history.append(resid)
        if sup_diff <= tol and resid <= tol * A:
            report.converged = True
            logger.debug("converged after %d iterations (residual %.3e)", it, resid)
            return GridFunction(geom, phi), report

    raise IterationLimitError(
        f"monotone iteration did not converge within {max_iter} iterations "
        f"(last sup-diff {report.sup_diff_history[-1]:.3e})",
        report=report,
    )
