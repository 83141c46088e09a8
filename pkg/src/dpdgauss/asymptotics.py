"""Score function, score vector and the asymptotic matrices J and K.

Notation: for one observation ``y`` write ``r = y - mu``, ``z = Sigma^{-1} r``,
``q = r^T z`` and ``e = exp(-tau q / 2)``.  With ``tr_i = tr(Sigma^{-1}
dSigma_i)`` the per-observation score is

    Psi_i = coef * ([-tr_i + 2 dmu_i^T z + z^T dSigma_i z] e + b tr_i),
    coef  = (tau+1) / (2 (2 pi)^(m tau/2)) |Sigma|^(-tau/2),
    b     = tau / (1+tau)^(m/2+1),

which is the gradient of the per-observation objective.  At ``tau = 0``
the weight is 1, ``b`` vanishes and ``coef = 1/2``.
"""

import math
from typing import NamedTuple

import numpy as np

from . import kernels
from .distributions import RngStream, sample_model_normal
from .errors import SingularMatrix
from .models import as_sample, constraint_eval, model_state
from .objective import EXP_FLOOR, _check_tau, objective_h

__all__ = [
    "psi",
    "psi_matrix",
    "score_u",
    "mean_score",
    "grad_h_fd",
    "hessian_h_fd",
    "delta_tau",
    "matrix_j",
    "matrix_k",
    "AsymptoticMatrices",
    "asymptotic_matrices",
    "RestrictedCovariance",
    "restricted_covariance",
    "restricted_from_matrices",
    "noncentrality",
    "noncentrality_from_matrices",
    "mc_score_moments",
    "mc_weight_mean",
    "exponential_j",
    "exponential_k",
    "poisson_j",
    "poisson_k",
    "solve_spd",
    "inverse_spd",
]

MC_CHUNK = 100_000


# -- linear algebra helpers ---------------------------------------------------

def _solve(a, b, name):
    try:
        x = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(name) from exc
    if not np.all(np.isfinite(x)):
        raise SingularMatrix(name, "non-finite solution")
    cond = np.linalg.cond(a) if a.size else 1.0
    if not np.isfinite(cond) or cond > 1e14:
        raise SingularMatrix(name, f"condition number {cond:.3g}")
    return x


def solve_spd(a, b, name="matrix"):
    """Solve ``a x = b`` for symmetric ``a``; Cholesky first, LU if that fails."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    try:
        c = np.linalg.cholesky(a)
        x = np.linalg.solve(c.T, np.linalg.solve(c, b))
        if np.all(np.isfinite(x)):
            return x
    except np.linalg.LinAlgError:
        pass
    return _solve(a, b, name)


def inverse_spd(a, name="matrix"):
    a = np.asarray(a, dtype=float)
    inv = solve_spd(a, np.eye(a.shape[0]), name)
    return 0.5 * (inv + inv.T)


def _sym(a):
    return 0.5 * (a + a.T)


# -- score ------------------------------------------------------------------------

def _score_coef(state, tau, m):
    coef = (tau + 1.0) / (2.0 * (2.0 * math.pi) ** (m * tau / 2.0)) * math.exp(-0.5 * tau * state.logdet)
    b = tau / (1.0 + tau) ** (m / 2.0 + 1.0)
    return coef, b


def _traces(state):
    return np.einsum("ij,kji->k", state.cov_inv, state.dcov)


def _psi_rows_general(y, state, tau):
    m = y.shape[1]
    coef, b = _score_coef(state, tau, m)
    tr = _traces(state)
    r = y - state.mu[None, :]
    z = r @ state.cov_inv
    q = np.sum(r * z, axis=1)
    x = -0.5 * tau * q
    e = np.where(x < EXP_FLOOR, 0.0, np.exp(np.maximum(x, EXP_FLOOR)))
    inner = -tr[None, :] + 2.0 * z @ state.dmu.T + np.einsum("ni,kij,nj->nk", z, state.dcov, z)
    return coef * (inner * e[:, None] + b * tr[None, :])


def _psi_rows(y, state, tau):
    if y.shape[1] == 1:
        return kernels.psi_rows(y[:, 0], state.mu[0], state.cov[0, 0],
                                state.dmu[:, 0], state.dcov[:, 0, 0], tau)
    return _psi_rows_general(y, state, tau)


def _psi_total(y, state, tau):
    if y.shape[1] == 1:
        return kernels.psi_sum(y[:, 0], state.mu[0], state.cov[0, 0],
                               state.dmu[:, 0], state.dcov[:, 0, 0], tau)
    rows = _psi_rows_general(y, state, tau)
    return np.array([math.fsum(rows[:, k]) for k in range(rows.shape[1])])


def psi(y, model, theta, tau):
    """Score ``Psi_tau(y; theta)`` of a single observation ``y``."""
    tau = _check_tau(tau)
    y = np.asarray(y, dtype=float).reshape(1, model.m)
    return _psi_rows(as_sample(y, model.m), model_state(model, theta), tau)[0]


def psi_matrix(sample, model, theta, tau):
    """``(n, d)`` matrix whose rows are ``Psi_tau(y_i; theta)``."""
    tau = _check_tau(tau)
    return _psi_rows(as_sample(sample, model.m), model_state(model, theta), tau)


def mean_score(sample, model, theta, tau):
    """``(1/n) sum_i Psi_tau(y_i; theta)``, the analytic gradient of the objective."""
    tau = _check_tau(tau)
    y = as_sample(sample, model.m)
    return _psi_total(y, model_state(model, theta), tau) / y.shape[0]


def score_u(sample, model, theta, tau):
    """``U = (1/(tau+1)) sum_i Psi_tau(y_i; theta)``."""
    tau = _check_tau(tau)
    y = as_sample(sample, model.m)
    return _psi_total(y, model_state(model, theta), tau) / (tau + 1.0)


def grad_h_fd(sample, model, theta, tau, h=1e-6):
    """Central-difference gradient of :func:`objective_h`; ``h`` is relative to ``max(1, |theta_i|)``."""
    theta = model.check(theta)
    y = as_sample(sample, model.m)
    g = np.empty(theta.size)
    for i in range(theta.size):
        step = h * max(1.0, abs(theta[i]))
        tp, tm = theta.copy(), theta.copy()
        tp[i] += step
        tm[i] -= step
        g[i] = (objective_h(y, model, tp, tau) - objective_h(y, model, tm, tau)) / (2.0 * step)
    return g


def hessian_h_fd(sample, model, theta, tau, h=1e-5):
    """Hessian of the objective by central differences of the analytic gradient."""
    theta = model.check(theta)
    y = as_sample(sample, model.m)
    d = theta.size
    hess = np.empty((d, d))
    for i in range(d):
        step = h * max(1.0, abs(theta[i]))
        tp, tm = theta.copy(), theta.copy()
        tp[i] += step
        tm[i] -= step
        hess[:, i] = (mean_score(y, model, tp, tau) - mean_score(y, model, tm, tau)) / (2.0 * step)
    return _sym(hess)


# -- asymptotic matrices --------------------------------------------------------------

def delta_tau(model, theta, tau, i):
    """``(tau/2) tr(Sigma^{-1} dSigma_i)`` for 0-based coordinate ``i``."""
    tau = _check_tau(tau)
    return 0.5 * tau * float(_traces(model_state(model, theta))[i])


def _j_from_state(state, tau, m):
    c = math.exp(-0.5 * tau * (m * math.log(2.0 * math.pi) + state.logdet))
    a = state.cov_inv
    mm = state.dmu @ a @ state.dmu.T
    delta = 0.5 * tau * _traces(state)
    s = np.einsum("ij,kjl->kil", a, state.dcov)          # Sigma^{-1} dSigma_k
    tt = np.einsum("kij,lji->kl", s, s)                    # tr(S_k S_l)
    j = c * (1.0 + tau) ** (-(m / 2.0 + 2.0)) * ((tau + 1.0) * mm + np.outer(delta, delta) + 0.5 * tt)
    return _sym(j)


def _k_from_state(state, tau, m):
    c2 = math.exp(-tau * (m * math.log(2.0 * math.pi) + state.logdet))
    a = state.cov_inv
    mm = state.dmu @ a @ state.dmu.T
    tr = _traces(state)
    d2 = tau * tr                                           # Delta at 2 tau
    d1 = 0.5 * tau * tr
    s = np.einsum("ij,kjl->kil", a, state.dcov)
    tt = np.einsum("kij,lji->kl", s, s)
    k = c2 * (1.0 + 2.0 * tau) ** (-(m / 2.0 + 2.0)) * (np.outer(d2, d2) + (1.0 + 2.0 * tau) * mm + 0.5 * tt)
    k -= c2 * (1.0 + tau) ** (-(m + 2.0)) * np.outer(d1, d1)
    return _sym(k)


def matrix_j(model, theta, tau):
    tau = _check_tau(tau)
    return _j_from_state(model_state(model, theta), tau, model.m)


def matrix_k(model, theta, tau):
    tau = _check_tau(tau)
    return _k_from_state(model_state(model, theta), tau, model.m)


class AsymptoticMatrices(NamedTuple):
    J: np.ndarray
    K: np.ndarray
    tau: float


def asymptotic_matrices(model, theta, tau):
    tau = _check_tau(tau)
    state = model_state(model, theta)
    return AsymptoticMatrices(_j_from_state(state, tau, model.m), _k_from_state(state, tau, model.m), tau)


class RestrictedCovariance(NamedTuple):
    Q: np.ndarray
    Pstar: np.ndarray
    M: np.ndarray


def restricted_from_matrices(J, K, G):
    """``Q = J^-1 G (G^T J^-1 G)^-1``, ``P* = J^-1 - Q G^T J^-1``, ``M = P* K P*^T``."""
    J = np.asarray(J, dtype=float)
    K = np.asarray(K, dtype=float)
    G = np.asarray(G, dtype=float).reshape(J.shape[0], -1)
    j_inv = inverse_spd(J, "J")
    if G.shape[1] == 0:
        Q = np.zeros((J.shape[0], 0))
        pstar = j_inv
    else:
        jg = j_inv @ G
        Q = jg @ inverse_spd(G.T @ jg, "G^T J^-1 G")
        pstar = j_inv - Q @ G.T @ j_inv
    M = _sym(pstar @ K @ pstar.T)
    return RestrictedCovariance(Q, pstar, M)


def restricted_covariance(model, theta, tau, constraint):
    mats = asymptotic_matrices(model, theta, tau)
    _, G = constraint_eval(constraint, theta)
    return restricted_from_matrices(mats.J, mats.K, G)


def noncentrality_from_matrices(J, K, l):
    l = np.atleast_1d(np.asarray(l, dtype=float))
    jl = np.asarray(J, dtype=float) @ l
    return max(0.0, float(jl @ solve_spd(K, jl, "K")))


def noncentrality(model, theta0, tau, l):
    """``delta = l^T J K^{-1} J l`` at ``theta0``."""
    mats = asymptotic_matrices(model, theta0, tau)
    return noncentrality_from_matrices(mats.J, mats.K, l)


# -- Monte Carlo oracles ------------------------------------------------------------------

def _chunks(total, size=MC_CHUNK):
    done = 0
    idx = 0
    while done < total:
        k = min(size, total - done)
        yield idx, k
        done += k
        idx += 1


def mc_score_moments(model, theta, tau, N, seed):
    """Sample mean and covariance of ``Psi_tau`` over ``N`` model-normal draws.

    Draws are generated in fixed-size chunks, each on its own stream, so the
    result does not depend on how chunks are scheduled.
    """
    tau = _check_tau(tau)
    state = model_state(model, theta)
    base = RngStream(seed)
    rows = [_psi_rows(sample_model_normal(model, theta, k, base.child("psi", idx)), state, tau)
            for idx, k in _chunks(int(N))]
    rows = np.concatenate(rows, axis=0)
    return rows.mean(axis=0), np.atleast_2d(np.cov(rows, rowvar=False))


def mc_weight_mean(model, theta, tau, N, seed):
    """Monte Carlo mean of ``exp(-tau q / 2)`` under model-normal draws."""
    tau = _check_tau(tau)
    state = model_state(model, theta)
    base = RngStream(seed)
    total = 0.0
    for idx, k in _chunks(int(N)):
        y = sample_model_normal(model, theta, k, base.child("weight", idx))
        r = y - state.mu[None, :]
        w = np.linalg.solve(state.chol, r.T)
        total += math.fsum(np.exp(-0.5 * tau * np.sum(w * w, axis=0)))
    return total / int(N)


# -- closed forms for the scalar presets ----------------------------------------------------

def exponential_j(theta, tau):
    return (2 * math.pi) ** (-tau / 2) * theta ** (-tau - 2) * (tau ** 2 + tau + 3) / (1 + tau) ** 2.5


def exponential_k(theta, tau):
    return ((2 * math.pi) ** (-tau) * theta ** (-2 * tau - 2)
            * ((4 * tau ** 2 + 2 * tau + 3) / (1 + 2 * tau) ** 2.5 - tau ** 2 / (1 + tau) ** 3))


def poisson_j(theta, tau):
    return ((2 * math.pi * theta) ** (-tau / 2) * (1 + tau) ** (-2.5)
            * (4 * theta * (1 + tau) + tau ** 2 + 2) / (4 * theta ** 2))


def poisson_k(theta, tau):
    bracket = ((2 * tau ** 2 + 2 * theta + 4 * theta * tau + 1) / (1 + 2 * tau) ** 2.5
               - tau ** 2 / (2 * (1 + tau) ** 3))
    return (2 * math.pi * theta) ** (-tau) / (2 * theta ** 2) * bracket
