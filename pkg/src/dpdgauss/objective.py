"""Gaussian-working-model DPD objective and the Gaussian log-likelihood.

Both branches of the objective are per-observation averages, so the
``tau = 0`` value is ``-(1/2) log|Sigma| - (1/(2n)) sum_i q_i``; the summed
form found in the literature equals ``n`` times this value.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidTau
from .models import as_sample, model_state

__all__ = ["DpdConstants", "dpd_constants", "objective_h", "gaussian_loglik", "quad_forms"]

LOG_2PI = math.log(2.0 * math.pi)
EXP_FLOOR = -745.0


@dataclass(frozen=True)
class DpdConstants:
    a: float
    b: float
    tau: float
    m: int


def dpd_constants(tau, m):
    """``a = (tau+1) / (tau (2 pi)^(m tau/2))`` and ``b = tau / (1+tau)^(m/2+1)``."""
    tau = float(tau)
    if not tau > 0 or not math.isfinite(tau):
        raise InvalidTau(f"constants need tau > 0, got {tau}")
    if int(m) < 1:
        raise ValueError("m must be >= 1")
    a = (tau + 1.0) / (tau * (2.0 * math.pi) ** (m * tau / 2.0))
    b = tau / (1.0 + tau) ** (m / 2.0 + 1.0)
    return DpdConstants(a=a, b=b, tau=tau, m=int(m))


def _check_tau(tau):
    tau = float(tau)
    if not tau >= 0 or not math.isfinite(tau):
        raise InvalidTau(f"tau must be a finite value >= 0, got {tau}")
    return tau


def quad_forms(y, state):
    """Mahalanobis forms ``q_i = (y_i - mu)^T Sigma^{-1} (y_i - mu)`` for each row."""
    r = y - state.mu[None, :]
    w = np.linalg.solve(state.chol, r.T)
    return np.sum(w * w, axis=0)


def _sums(y, state, tau):
    """Return ``(sum_i exp(-tau q_i/2), sum_i q_i)``."""
    if y.shape[1] == 1:
        return kernels.weight_sum(y[:, 0], state.mu[0], state.cov[0, 0], tau)
    q = quad_forms(y, state)
    x = -0.5 * tau * q
    e = np.where(x < EXP_FLOOR, 0.0, np.exp(np.maximum(x, EXP_FLOOR)))
    return math.fsum(e), math.fsum(q)


def objective_h(sample, model, theta, tau):
    """Averaged DPD objective; maximized by the MDPDGE."""
    tau = _check_tau(tau)
    y = as_sample(sample, model.m)
    state = model_state(model, theta)
    n = y.shape[0]
    sum_e, sum_q = _sums(y, state, tau)
    if tau == 0.0:
        return -0.5 * state.logdet - 0.5 * sum_q / n
    c = dpd_constants(tau, model.m)
    return c.a * math.exp(-0.5 * tau * state.logdet) * (sum_e / n - c.b) - 1.0 / tau


def gaussian_loglik(sample, model, theta):
    y = as_sample(sample, model.m)
    state = model_state(model, theta)
    n, m = y.shape
    _, sum_q = _sums(y, state, 0.0)
    return -0.5 * n * m * LOG_2PI - 0.5 * n * state.logdet - 0.5 * sum_q
