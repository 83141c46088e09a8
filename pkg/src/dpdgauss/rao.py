"""Rao-type (score) tests built on the DPD Gaussian score.

For a simple null ``theta = theta0`` the statistic is

    R = (1/n) U^T K^{-1} U,   U = (1/(tau+1)) sum_i Psi_tau(y_i; theta0),

asymptotically chi-square with ``d`` degrees of freedom.  The exponential
and Poisson fast paths are the same formula written out for those models
and agree with the generic path to rounding.  ``mdpde_rao_exponential`` is
the score test built on the parametric exponential DPD estimator, used as
a benchmark in the simulation study; at ``beta = 0`` it is the classical
Rao test ``n (ybar - theta0)^2 / theta0^2``.
"""

import json
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from . import kernels
from .asymptotics import asymptotic_matrices, matrix_k, noncentrality, restricted_from_matrices, score_u, solve_spd
from .distributions import chisq_quantile, chisq_sf
from .errors import InvalidConstraint, NoConvergence
from .estimators import fit_rmdpdge
from .models import as_sample, as_theta, constraint_eval

__all__ = [
    "TestReport",
    "make_report",
    "rao_statistic",
    "rao_exponential",
    "rao_exponential_batch",
    "rao_poisson",
    "rao_poisson_batch",
    "rao_composite",
    "mdpde_rao_exponential",
    "mdpde_rao_exponential_batch",
    "exponential_c",
    "poisson_d",
    "mdpde_c",
    "power_approximation",
]


@dataclass
class TestReport:
    __test__ = False  # not a pytest class

    statistic: float
    df: int
    alpha: float
    critical_value: float
    p_value: float
    reject: bool
    noncentrality: Optional[float] = None
    method: str = "rao"

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict())


def make_report(statistic, df, alpha, method, noncentrality=None):
    statistic = float(statistic)
    crit = chisq_quantile(int(df), float(alpha))
    return TestReport(
        statistic=statistic,
        df=int(df),
        alpha=float(alpha),
        critical_value=crit,
        p_value=chisq_sf(max(statistic, 0.0), int(df)),
        reject=bool(statistic > crit),
        noncentrality=noncentrality,
        method=method,
    )


def rao_statistic(sample, model, theta0, tau, alpha=0.05):
    """Simple-null Rao-type test of ``theta = theta0``."""
    y = as_sample(sample, model.m)
    theta0 = model.check(theta0)
    u = score_u(y, model, theta0, tau)
    k = matrix_k(model, theta0, tau)
    stat = float(u @ solve_spd(k, u, "K")) / y.shape[0]
    return make_report(max(stat, 0.0), model.d, alpha, "rao")


# -- closed forms -----------------------------------------------------------------

def exponential_c(tau):
    """Bracket of the exponential K: ``K = (2 pi)^-tau theta^(-2 tau - 2) C(tau)``."""
    return (4 * tau ** 2 + 2 * tau + 3) / (1 + 2 * tau) ** 2.5 - tau ** 2 / (1 + tau) ** 3


def poisson_d(theta, tau):
    """Bracket of the Poisson K: ``K = (2 pi theta)^-tau / (2 theta^2) D``."""
    return ((2 * tau ** 2 + 2 * theta + 4 * theta * tau + 1) / (1 + 2 * tau) ** 2.5
            - tau ** 2 / (2 * (1 + tau) ** 3))


def mdpde_c(beta):
    return (4 * beta ** 2 + 1) / (2 * beta + 1) ** 3 - beta ** 2 / (beta + 1) ** 4


def rao_exponential_batch(samples, theta0, tau):
    """``R_tau`` for each row of a ``(reps, n)`` matrix of exponential-model samples."""
    y = np.atleast_2d(np.asarray(samples, dtype=float))
    s = kernels.exp_rao_sums(y, theta0, tau)
    return s * s / (y.shape[1] * theta0 ** 4 * exponential_c(tau))


def rao_exponential(sample, theta0, tau):
    y = np.asarray(sample, dtype=float).reshape(1, -1)
    return float(rao_exponential_batch(y, float(theta0), float(tau))[0])


def rao_poisson_batch(samples, theta0, tau):
    y = np.atleast_2d(np.asarray(samples, dtype=float))
    s = kernels.poisson_rao_sums(y, theta0, tau)
    return s * s / (2.0 * y.shape[1] * theta0 ** 2 * poisson_d(theta0, tau))


def rao_poisson(sample, theta0, tau):
    y = np.asarray(sample, dtype=float).reshape(1, -1)
    return float(rao_poisson_batch(y, float(theta0), float(tau))[0])


def mdpde_rao_exponential_batch(samples, theta0, beta):
    y = np.atleast_2d(np.asarray(samples, dtype=float))
    n = y.shape[1]
    s = kernels.mdpde_exp_sums(y, theta0, beta) / theta0 + n * beta / (beta + 1) ** 2
    return s * s / (n * mdpde_c(beta))


def mdpde_rao_exponential(sample, theta0, beta, alpha=0.05):
    """Score test from the parametric exponential DPD estimator, ``df = 1``."""
    if not theta0 > 0:
        raise ValueError("theta0 must be positive")
    if not beta >= 0:
        raise ValueError("beta must be >= 0")
    y = np.asarray(sample, dtype=float).reshape(1, -1)
    stat = float(mdpde_rao_exponential_batch(y, float(theta0), float(beta))[0])
    return make_report(stat, 1, alpha, "mdpde-rao")


# -- composite null ----------------------------------------------------------------

def rao_composite(sample, model, constraint, tau, alpha=0.05, theta0=None, fit=None):
    """Score statistic for the composite null ``g(theta) = 0``.

    Evaluated at the restricted estimator ``theta~``:

        (1/n) U^T Q (Q^T K Q)^{-1} Q^T U,

    reported with ``df = r``.  Its limiting distribution is not established,
    so the p-value and decision use chi-square(r) as a convention and the
    report carries ``method = "composite-experimental"``.
    """
    if constraint.r == 0:
        raise InvalidConstraint("composite test needs at least one restriction")
    y = as_sample(sample, model.m)
    if fit is None:
        fit = fit_rmdpdge(y, model, tau, constraint, theta0=theta0)
    if not fit.converged:
        raise NoConvergence("restricted fit did not converge", fit)
    theta = fit.theta_hat
    mats = asymptotic_matrices(model, theta, tau)
    _, G = constraint_eval(constraint, theta)
    q = restricted_from_matrices(mats.J, mats.K, G).Q
    u = score_u(y, model, theta, tau)
    qu = q.T @ u
    mid = q.T @ mats.K @ q
    stat = float(qu @ solve_spd(mid, qu, "Q^T K Q")) / y.shape[0]
    return make_report(max(stat, 0.0), constraint.r, alpha, "composite-experimental")


# -- power ---------------------------------------------------------------------------

def power_approximation(model, theta0, theta_alt, tau, n, alpha=0.05):
    """``1 - F_{chi2_d(delta)}(chi2_{d,alpha})`` with ``l = sqrt(n) (theta_alt - theta0)``."""
    theta0 = as_theta(theta0, model.d)
    theta_alt = as_theta(theta_alt, model.d)
    l = math.sqrt(n) * (theta_alt - theta0)
    delta = noncentrality(model, theta0, tau, l)
    crit = chisq_quantile(model.d, alpha)
    return chisq_sf(crit, model.d, delta)
