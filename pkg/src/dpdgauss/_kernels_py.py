"""NumPy implementations of the compiled kernels (same signatures as ``_kernels``)."""

import numpy as np

EXP_FLOOR = -745.0


def _clamped_exp(x):
    x = np.asarray(x, dtype=float)
    return np.where(x < EXP_FLOOR, 0.0, np.exp(np.maximum(x, EXP_FLOOR)))


def weight_sum(y, mu, var, tau):
    with np.errstate(over="ignore"):
        q = (y - mu) ** 2 / var
    return float(np.sum(_clamped_exp(-0.5 * tau * q))), float(np.sum(q))


def _psi_parts(y, mu, var, tau):
    coef = (tau + 1.0) / (2.0 * (2.0 * np.pi * var) ** (0.5 * tau))
    b = tau / (1.0 + tau) ** 1.5
    r = y - mu
    z = r / var
    e = _clamped_exp(-0.5 * tau * r * z)
    return coef, b, z, e


def psi_rows(y, mu, var, dmu, dvar, tau):
    coef, b, z, e = _psi_parts(y, mu, var, tau)
    dmu = np.asarray(dmu, dtype=float)
    dvar = np.asarray(dvar, dtype=float)
    tr = dvar / var
    inner = (-tr[None, :] + 2.0 * z[:, None] * dmu[None, :] + (z * z)[:, None] * dvar[None, :])
    return coef * (inner * e[:, None] + b * tr[None, :])


def psi_sum(y, mu, var, dmu, dvar, tau):
    coef, b, z, e = _psi_parts(y, mu, var, tau)
    dmu = np.asarray(dmu, dtype=float)
    dvar = np.asarray(dvar, dtype=float)
    s0, s1, s2 = np.sum(e), np.sum(z * e), np.sum(z * z * e)
    n = y.shape[0]
    return coef * (-(dvar / var) * s0 + 2.0 * dmu * s1 + dvar * s2 + n * b * dvar / var)


def exp_rao_sums(y, theta0, tau):
    u = (y - theta0) / theta0
    w = _clamped_exp(-0.5 * tau * u * u)
    shift = tau * theta0 ** 2 / (1.0 + tau) ** 1.5
    return np.sum((y * y - y * theta0 - theta0 ** 2) * w + shift, axis=1)


def poisson_rao_sums(y, theta0, tau):
    r = y - theta0
    w = _clamped_exp(-0.5 * tau * r * r / theta0)
    shift = tau * theta0 / (1.0 + tau) ** 1.5
    return np.sum((y * y - theta0 ** 2 - theta0) * w + shift, axis=1)


def mdpde_exp_sums(y, theta0, beta):
    return np.sum((y - theta0) * _clamped_exp(-beta * y / theta0), axis=1)
