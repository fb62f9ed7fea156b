"""Grid functions, weighted sup-norms and decay-rate fitting.

Membership of a profile f in a weighted space of decay rate delta is probed
in two ways: the weighted sup-norm max rho^{-delta} |f| (a sup-norm proxy,
no seminorms), and a least-squares fit of log|f| against log rho over an
interior window that drops the 10% of nodes nearest each end of the grid,
where boundary stencils and the outer truncation pollute the profile.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .geometry import RadialGeometry

__all__ = ["GridFunction", "DecayFit", "weighted_sup_norm", "fit_decay_rate",
           "fit_window", "grid_function_to_csv"]


@dataclass(frozen=True)
class GridFunction:
    """Real values on the nodes of a RadialGeometry."""

    geom: RadialGeometry
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.geom.t.shape:
            raise ValueError(
                f"values shape {v.shape} does not match the {self.geom.num_nodes}-node grid"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function contains non-finite values")
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, geom: RadialGeometry, value: float) -> "GridFunction":
        return cls(geom, np.full(geom.num_nodes, float(value)))

    def __len__(self):
        return self.geom.num_nodes


@dataclass(frozen=True)
class DecayFit:
    """Result of a log-log decay fit.

    delta_hat is +inf when the profile vanishes identically on the fit
    window (the zero-function marker).
    """

    delta_hat: float
    r2: float
    window: tuple


def fit_window(num_nodes: int) -> tuple:
    """Index range [i0, i1) excluding 10% of nodes at each end."""
    margin = math.ceil(0.1 * num_nodes)
    return margin, num_nodes - margin


def weighted_sup_norm(f: GridFunction, delta: float) -> float:
    """max over nodes of rho^{-delta} |f|."""
    if not math.isfinite(delta):
        raise ValueError("delta must be finite")
    return float(np.max(f.geom.rho ** (-delta) * np.abs(f.values)))


def fit_decay_rate(f: GridFunction) -> DecayFit:
    """Least-squares slope of log|f| against log rho over the interior
    window; a pure power law c*rho^p fits to delta_hat = p exactly."""
    i0, i1 = fit_window(f.geom.num_nodes)
    window = (i0, i1)
    vals = np.abs(f.values[i0:i1])
    rho = f.geom.rho[i0:i1]
    mask = vals > 0.0
    if np.count_nonzero(mask) < max(4, (i1 - i0) // 2):
        return DecayFit(delta_hat=math.inf, r2=0.0, window=window)
    x = np.log(rho[mask])
    y = np.log(vals[mask])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(np.dot(resid, resid))
    ss_tot = float(np.dot(y - y.mean(), y - y.mean()))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res <= 1e-28 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return DecayFit(delta_hat=float(slope), r2=r2, window=window)


def grid_function_to_csv(f: GridFunction, path) -> None:
    """One row per node, columns (t, rho, value)."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["t", "rho", "value"])
        for t, rho, v in zip(f.geom.t, f.geom.rho, f.values):
            writer.writerow([format(t, ".17g"), format(rho, ".17g"), format(v, ".17g")])
