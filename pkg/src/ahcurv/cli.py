"""Batch front-end: read a JSON problem spec, run a solver, emit CSV profiles
and a schema-versioned JSON report.

Commands: prescribe-scal, lichnerowicz, make-tt, counterexample,
indicial-check, convergence-study.  Exit codes: 0 success, 1 solver failure,
2 counterexample regime, 64 malformed spec.  Outputs are deterministic:
fixed iteration orders, no randomness, no timestamps.  See FORMATS.md for
the exact CSV columns and JSON keys.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import lichnerowicz as lich
from . import scalarcurv, ttensor
from .errors import AhcurvError, CounterexampleRegimeError
from .geometry import (
    RadialGeometry,
    conformal_mean_curvature,
    make_hyperbolic_exterior,
    make_toric_collar,
)
from .grid import GridFunction, fit_decay_rate, grid_function_to_csv
from .linsolve import LinearRobinProblem, solve as solve_robin

SCHEMA_VERSION = 1
COMMANDS = (
    "prescribe-scal",
    "lichnerowicz",
    "make-tt",
    "counterexample",
    "indicial-check",
    "convergence-study",
)

logger = logging.getLogger(__name__)


class SpecError(ValueError):
    """Malformed problem spec (exit code 64)."""


@dataclass
class RunConfig:
    command: str
    input_path: str
    output_dir: str
    overrides: dict = field(default_factory=dict)


# --- spec parsing ------------------------------------------------------------

def _need(doc: dict, key: str, context: str):
    if key not in doc:
        raise SpecError(f"missing key '{key}' in {context}")
    return doc[key]


def parse_geometry(doc: dict) -> RadialGeometry:
    kind = _need(doc, "kind", "geometry")
    n = int(_need(doc, "n", "geometry"))
    num_nodes = int(_need(doc, "num_nodes", "geometry"))
    T = float(_need(doc, "T", "geometry"))
    try:
        if kind == "hyperbolic_exterior":
            return make_hyperbolic_exterior(n, float(_need(doc, "t0", "geometry")), T, num_nodes)
        if kind == "toric_collar":
            return make_toric_collar(n, float(_need(doc, "A", "geometry")), T, num_nodes)
    except ValueError as exc:
        raise SpecError(str(exc)) from exc
    raise SpecError(f"unknown geometry kind '{kind}'")


def parse_profile(doc: dict, geom: RadialGeometry, context: str) -> GridFunction:
    """Profiles are given as {'kind': 'constant'|'power_law'|'kernel', ...}.

    power_law: amplitude * rho^delta; kernel: amplitude * q^{-p} with the
    geometry's warp q.
    """
    kind = _need(doc, "kind", context)
    if kind == "zero":
        return GridFunction.constant(geom, 0.0)
    if kind == "constant":
        return GridFunction.constant(geom, float(_need(doc, "value", context)))
    if kind == "power_law":
        amp = float(_need(doc, "amplitude", context))
        delta = float(_need(doc, "delta", context))
        return GridFunction(geom, amp * geom.rho**delta)
    if kind == "kernel":
        amp = float(_need(doc, "amplitude", context))
        p = float(_need(doc, "power", context))
        return GridFunction(geom, amp * np.exp(-p * geom.log_warp))
    raise SpecError(f"unknown profile kind '{kind}' in {context}")


def _apply_overrides(doc: dict, overrides: dict) -> dict:
    """Dotted key=value overrides, parsed as JSON scalars when possible."""
    for dotted, raw in overrides.items():
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = doc
        parts = dotted.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise SpecError(f"override path '{dotted}' crosses a non-object")
        node[parts[-1]] = value
    return doc


# --- command implementations --------------------------------------------------

def _cmd_prescribe_scal(doc, out_dir):
    geom = parse_geometry(_need(doc, "geometry", "spec"))
    n = geom.n
    target = doc.get("scal_hat", {"kind": "constant", "value": -float(n * (n - 1))})
    if target.get("kind") == "power_law_offset":
        # scal_hat = -n(n-1) (1 + amplitude * rho^delta)
        amp = float(_need(target, "amplitude", "scal_hat"))
        delta = float(_need(target, "delta", "scal_hat"))
        scal_hat = GridFunction(geom, -float(n * (n - 1)) * (1.0 + amp * geom.rho**delta))
    else:
        scal_hat = parse_profile(target, geom, "scal_hat")
    bdoc = _need(doc, "boundary", "spec")
    btype = _need(bdoc, "type", "boundary")
    if btype == "dirichlet":
        boundary = scalarcurv.DirichletBoundary(float(_need(bdoc, "value", "boundary")))
    elif btype == "mean_curvature":
        boundary = scalarcurv.MeanCurvatureBoundary(float(_need(bdoc, "value", "boundary")))
    else:
        raise SpecError(f"unknown boundary type '{btype}'")
    delta = doc.get("delta")
    try:
        spec = scalarcurv.PrescriptionSpec(geom, scal_hat, boundary,
                                           None if delta is None else float(delta))
    except ValueError as exc:
        raise SpecError(str(exc)) from exc
    tol = float(doc.get("tol", 1e-10))
    phi, report = scalarcurv.solve_prescription(spec, tol=tol,
                                                max_iter=int(doc.get("max_iter", 100_000)))
    grid_function_to_csv(phi, os.path.join(out_dir, "solution.csv"))
    fit = fit_decay_rate(GridFunction(geom, phi.values - 1.0))
    info = {
        "A_used": report.A_used,
        "iterations": report.iterations,
        "final_residual": report.final_residual,
        "final_sup_diff": report.sup_diff_history[-1],
        "bracket_violation": report.bracket_violation,
        "phi_inner": float(phi.values[0]),
        "phi_outer": float(phi.values[-1]),
        "delta_hat": fit.delta_hat if math.isfinite(fit.delta_hat) else None,
        "fit_r2": fit.r2,
        "files": {"solution": "solution.csv"},
    }
    if delta is not None:
        check = scalarcurv.verify_decay(phi, float(delta))
        info["delta_expected"] = float(delta)
        info["decay_pass"] = check.passed
    if btype == "mean_curvature":
        info["mean_curvature_transform"] = conformal_mean_curvature(geom, phi)
    return info


def _cmd_lichnerowicz(doc, out_dir):
    geom = parse_geometry(_need(doc, "geometry", "spec"))
    tau = float(_need(doc, "tau", "spec"))
    epsilon = int(_need(doc, "epsilon", "spec"))
    source = doc.get("L_source", {"kind": "zero"})
    skind = source.get("kind", "zero")
    if skind == "analytic":
        tt = ttensor.analytic_tt(geom, float(_need(source, "C", "L_source")))
        L_sq = tt.l_squared()
        L_nn = tt.boundary_normal_value
    elif skind == "zero":
        L_sq = GridFunction.constant(geom, 0.0)
        L_nn = 0.0
    else:
        L_sq = parse_profile(source, geom, "L_source")
        if np.any(L_sq.values < 0):
            raise SpecError("L_source must define a nonnegative |L|^2 profile")
        L_nn = float(source.get("L_nn", 0.0))
    try:
        spec = lich.HorizonSpec(n=geom.n, epsilon=epsilon, tau=tau, L_nn=L_nn)
    except ValueError as exc:
        raise SpecError(str(exc)) from exc
    tol = float(doc.get("tol", 1e-10))
    phi, report = lich.solve_lichnerowicz(geom, spec, L_sq, tol=tol,
                                          max_iter=int(doc.get("max_iter", 200_000)))
    data = lich.assemble_initial_data(geom, phi, GridFunction(geom, np.sqrt(
        L_sq.values * (geom.n - 1) / geom.n)) if np.any(L_sq.values > 0) else None, tau)
    ham, mom = lich.constraint_residuals(data)
    grid_function_to_csv(phi, os.path.join(out_dir, "solution.csv"))
    grid_function_to_csv(ham, os.path.join(out_dir, "residual_hamiltonian.csv"))
    grid_function_to_csv(mom, os.path.join(out_dir, "residual_momentum.csv"))
    interior = lich.interior_residual(geom, phi.values, L_sq.values)
    return {
        "A_used": report.A_used,
        "iterations": report.iterations,
        "final_residual": report.final_residual,
        "bracket_violation": report.bracket_violation,
        "phi_inner": float(phi.values[0]),
        "phi_outer": float(phi.values[-1]),
        "interior_residual_max": float(np.max(np.abs(interior[1:-1]))),
        "horizon_residual": lich.boundary_residual(geom, spec, phi.values),
        "ham_residual_max": float(np.max(np.abs(ham.values[1:-1]))),
        "mom_residual_max": float(np.max(np.abs(mom.values[1:-1]))),
        "files": {
            "solution": "solution.csv",
            "hamiltonian": "residual_hamiltonian.csv",
            "momentum": "residual_momentum.csv",
        },
    }


def _cmd_make_tt(doc, out_dir):
    geom = parse_geometry(_need(doc, "geometry", "spec"))
    if "C" in doc:
        tt = ttensor.analytic_tt(geom, float(doc["C"]))
    else:
        lambda0 = parse_profile(_need(doc, "lambda0", "spec"), geom, "lambda0")
        tt = ttensor.solve_tt(geom, lambda0, float(doc.get("b", 0.0)))
    grid_function_to_csv(tt.mu, os.path.join(out_dir, "mu.csv"))
    grid_function_to_csv(tt.u, os.path.join(out_dir, "potential.csv"))
    grid_function_to_csv(tt.w, os.path.join(out_dir, "w.csv"))
    div = ttensor.divergence_residual(geom, tt)
    return {
        "b": tt.b,
        "boundary_normal_value": tt.boundary_normal_value,
        "trace_check": ttensor.reconstructed_trace(geom, tt.mu.values),
        "divergence_residual_max": float(np.max(np.abs(div.values[1:-1]))),
        "l_squared_inner": float(tt.l_squared().values[0]),
        "files": {"mu": "mu.csv", "potential": "potential.csv", "w": "w.csv"},
    }


def _cmd_counterexample(doc, out_dir):
    n = int(_need(doc, "n", "spec"))
    grid_doc = doc.get("a_grid", {"start": 0.1, "stop": 10.0, "count": 25})
    if isinstance(grid_doc, list):
        a_values = [float(a) for a in grid_doc]
    else:
        a_values = np.geomspace(
            float(_need(grid_doc, "start", "a_grid")),
            float(_need(grid_doc, "stop", "a_grid")),
            int(_need(grid_doc, "count", "a_grid")),
        ).tolist()
    scan = lich.counterexample_scan(
        n, a_values,
        r_max=float(doc.get("r_max", 20.0)),
        tol=float(doc.get("tol", 1e-13)),
    )
    entries = []
    for idx, traj in enumerate(scan.trajectories):
        name = f"trajectory_{idx:03d}.csv"
        with open(os.path.join(out_dir, name), "w", newline="") as handle:
            handle.write("r,phi,phi_prime,B\n")
            for r, p, dp, b in zip(traj.r, traj.phi, traj.phi_prime, traj.B):
                handle.write(f"{r:.17g},{p:.17g},{dp:.17g},{b:.17g}\n")
        entries.append({
            "a": traj.a,
            "file": name,
            "max_abs_B": traj.max_abs_B,
            "terminal_phi": traj.terminal_phi,
            "min_distance_from_one_tail": traj.min_distance_from_one_tail,
            "monotone_decreasing": traj.monotone_decreasing,
        })
    return {
        "summary": "no solution found" if scan.no_solution_found else "inconclusive",
        "no_solution_found": scan.no_solution_found,
        "max_abs_B": scan.max_abs_B,
        "trajectories": entries,
    }


def _cmd_indicial_check(doc, out_dir):
    geom = parse_geometry(_need(doc, "geometry", "spec"))
    s_minus, s_plus = ttensor.indicial_check(geom)
    return {
        "s_minus": s_minus,
        "s_plus": s_plus,
        "indicial_radius": 0.5 * (s_plus - s_minus),
        "expected": {"s_minus": -2.0, "s_plus": geom.n - 1.0,
                     "radius": (geom.n + 1.0) / 2.0},
    }


def _cmd_convergence_study(doc, out_dir):
    """Manufactured-solution convergence of the linear Robin solver:
    u* = e^{-2t} on the requested geometry family."""
    base = _need(doc, "geometry", "spec")
    resolutions = doc.get("resolutions", [128, 256, 512, 1024])
    A = float(doc.get("A", 3.0))
    errors = []
    for num in resolutions:
        gdoc = dict(base)
        gdoc["num_nodes"] = int(num)
        geom = parse_geometry(gdoc)
        u_star = np.exp(-2.0 * geom.t)
        lap = (4.0 - 2.0 * geom.H_r) * u_star  # Delta e^{-2t} exactly
        g = GridFunction(geom, -lap + A * u_star)
        h_bc = 2.0 * u_star[0] + A * u_star[0]
        problem = LinearRobinProblem(geom, A, g, h_bc, float(u_star[-1]))
        u = solve_robin(problem)
        errors.append(float(np.max(np.abs(u.values - u_star))))
    orders = [
        math.log2(errors[i] / errors[i + 1]) for i in range(len(errors) - 1)
    ]
    return {
        "resolutions": [int(r) for r in resolutions],
        "max_errors": errors,
        "observed_orders": orders,
    }


_HANDLERS = {
    "prescribe-scal": _cmd_prescribe_scal,
    "lichnerowicz": _cmd_lichnerowicz,
    "make-tt": _cmd_make_tt,
    "counterexample": _cmd_counterexample,
    "indicial-check": _cmd_indicial_check,
    "convergence-study": _cmd_convergence_study,
}


def run(config: RunConfig) -> int:
    """Execute one command; always writes <out>/report.json."""
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": config.command,
        "input": os.path.basename(config.input_path),
        "status": "ok",
    }
    os.makedirs(config.output_dir, exist_ok=True)
    try:
        with open(config.input_path) as handle:
            doc = json.load(handle)
        if not isinstance(doc, dict):
            raise SpecError("problem spec must be a JSON object")
        doc = _apply_overrides(doc, config.overrides)
        handler = _HANDLERS[config.command]
        report["result"] = handler(doc, config.output_dir)
        status = 0
    except (SpecError, json.JSONDecodeError, OSError) as exc:
        report["status"] = "malformed_spec"
        report["error"] = str(exc)
        print(f"usage error: {exc}", file=sys.stderr)
        status = 64
    except CounterexampleRegimeError as exc:
        report["status"] = "counterexample_regime"
        report["error"] = str(exc)
        logger.warning("counterexample regime: %s", exc)
        status = 2
    except (AhcurvError, ArithmeticError) as exc:
        report["status"] = "solver_failure"
        report["error"] = f"{type(exc).__name__}: {exc}"
        logger.error("solver failure: %s", exc)
        status = 1
    with open(os.path.join(config.output_dir, "report.json"), "w") as handle:
        json.dump(report, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return status


def _configure_logging():
    level = {"quiet": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("AHCURV_LOG", "quiet"), logging.ERROR
    )
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ahcurv",
        description="Radial solvers on asymptotically hyperbolic manifolds "
                    "with inner boundary",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--input", required=True, help="JSON problem spec")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="dotted-path spec override")
    return parser


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; remap to the documented code
        return 64 if exc.code not in (0, None) else 0
    overrides = {}
    for item in args.overrides:
        if "=" not in item:
            print(f"usage error: override '{item}' is not KEY=VALUE", file=sys.stderr)
            return 64
        key, _, value = item.partition("=")
        overrides[key] = value
    config = RunConfig(args.command, args.input, args.out, overrides)
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
