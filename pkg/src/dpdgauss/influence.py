"""Influence functions of the unrestricted and restricted estimators.

The unrestricted influence function is ``J^{-1} Psi(y)``.  Because
``Psi`` carries the factor ``tau + 1`` while the expected negative score
derivative is ``(tau + 1) J``, the Gateaux derivative of the estimator
functional is this quantity divided by ``tau + 1``; ``normalized=True``
returns that version.  The two coincide at ``tau = 0``.

For the restricted estimator the default is the projection ``P* Psi`` with
``P* = J^{-1} - Q G^T J^{-1}``, which satisfies ``G^T IF = 0`` exactly.
``form="stacked"`` gives the least-squares solution
``(J^T J + G G^T)^{-1} J^T Psi`` of the stacked system ``[J; G^T] IF =
[Psi; 0]``; that system is overdetermined, so its solution satisfies the
constraint only when ``Psi`` happens to make it consistent.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .asymptotics import matrix_j, psi_matrix, restricted_from_matrices, _solve
from .models import as_theta, constraint_eval

__all__ = [
    "InfluenceCurve",
    "influence_unrestricted",
    "influence_restricted",
    "restricted_influence_from_matrices",
    "influence_curve",
    "write_influence_csv",
]


@dataclass
class InfluenceCurve:
    y_grid: np.ndarray
    values: np.ndarray   # (len(y_grid), d)
    tau: float
    theta: np.ndarray


def _points(model, y):
    y = np.asarray(y, dtype=float)
    if model.m == 1:
        return y.reshape(-1, 1)
    return np.atleast_2d(y).reshape(-1, model.m)


def _unrestricted(model, theta, tau, y, normalized):
    j = matrix_j(model, theta, tau)
    ps = psi_matrix(_points(model, y), model, theta, tau)
    out = _solve(j, ps.T, "J").T
    return out / (1.0 + tau) if normalized else out


def influence_unrestricted(model, theta, tau, y, normalized=False):
    """``J^{-1} Psi(y; theta)`` for a single observation ``y``."""
    return _unrestricted(model, theta, tau, y, normalized)[0]


def restricted_influence_from_matrices(J, G, psi_value, form="projected"):
    """Restricted influence function from ``J``, ``G`` and a score value."""
    J = np.asarray(J, dtype=float)
    G = np.asarray(G, dtype=float).reshape(J.shape[0], -1)
    ps = np.asarray(psi_value, dtype=float).reshape(-1)
    if form == "projected":
        return restricted_from_matrices(J, J, G).Pstar @ ps
    if form == "stacked":
        return _solve(J.T @ J + G @ G.T, J.T @ ps, "J^T J + G G^T")
    raise ValueError(f"unknown form {form!r}")


def influence_restricted(model, theta, tau, constraint, y, form="projected", normalized=False):
    """Influence function of the restricted estimator at observation ``y``.

    ``form`` is ``"projected"`` (``P* Psi``, default) or ``"stacked"``.
    """
    theta = as_theta(theta, model.d)
    j = matrix_j(model, theta, tau)
    _, G = constraint_eval(constraint, theta)
    ps = psi_matrix(_points(model, y), model, theta, tau)[0]
    out = restricted_influence_from_matrices(j, G, ps, form)
    return out / (1.0 + tau) if normalized else out


def influence_curve(model, theta, tau_list, y_grid, normalized=False):
    """One :class:`InfluenceCurve` per tau, tabulated over ``y_grid`` (m = 1 models)."""
    if model.m != 1:
        raise ValueError("influence curves are tabulated for scalar-observation models only")
    theta = as_theta(theta, model.d)
    grid = np.asarray(y_grid, dtype=float).reshape(-1)
    curves = []
    for tau in np.atleast_1d(np.asarray(tau_list, dtype=float)):
        if grid.size == 0:
            vals = np.zeros((0, model.d))
        else:
            vals = _unrestricted(model, theta, float(tau), grid, normalized)
        curves.append(InfluenceCurve(grid.copy(), vals, float(tau), theta.copy()))
    return curves


def write_influence_csv(curves, path):
    """Write ``y, tau, if_1, ..., if_d`` rows with 17 significant digits."""
    d = curves[0].values.shape[1] if curves else 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["y", "tau"] + [f"if_{k + 1}" for k in range(d)])
        for c in curves:
            for yv, row in zip(c.y_grid, c.values):
                w.writerow(["%.17g" % yv, "%.17g" % c.tau] + ["%.17g" % v for v in row])
