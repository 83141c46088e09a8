# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for scalar-observation models.

Every function here has a NumPy twin in ``_kernels_py`` with the same
signature; ``dpdgauss.kernels`` picks one at import time.  Sums are
accumulated plainly in blocks of ``BLOCK`` terms and the block totals are
combined with Neumaier compensation.  Compensating every term would
serialize the loop on a data-dependent branch and cost an order of
magnitude in speed for no visible gain in accuracy.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs, isfinite, pow

cnp.import_array()

cdef double EXP_FLOOR = -745.0
cdef enum:
    BLOCK = 256


cdef inline double _clamped_exp(double x) noexcept nogil:
    if x < EXP_FLOOR:
        return 0.0
    return exp(x)


cdef inline void _neumaier(double *s, double *c, double x) noexcept nogil:
    cdef double t = s[0] + x
    if fabs(s[0]) >= fabs(x):
        c[0] += (s[0] - t) + x
    else:
        c[0] += (x - t) + s[0]
    s[0] = t


cdef inline double _total(double s, double c) noexcept nogil:
    # an infinite sum leaves a NaN compensation term behind
    return s + c if isfinite(s) else s


def weight_sum(const double[::1] y, double mu, double var, double tau):
    """Return ``(sum_i exp(-tau q_i / 2), sum_i q_i)`` with q_i = (y_i - mu)^2 / var."""
    cdef Py_ssize_t i, kb, lo, hi, n = y.shape[0]
    cdef double r, q, be, bq, se = 0.0, ce = 0.0, sq = 0.0, cq = 0.0
    with nogil:
        for kb in range((n + BLOCK - 1) // BLOCK):
            lo = kb * BLOCK
            hi = lo + BLOCK if lo + BLOCK < n else n
            be = 0.0
            bq = 0.0
            for i in range(lo, hi):
                r = y[i] - mu
                q = r * r / var
                be = be + _clamped_exp(-0.5 * tau * q)
                bq = bq + q
            _neumaier(&se, &ce, be)
            _neumaier(&sq, &cq, bq)
    return _total(se, ce), _total(sq, cq)


def psi_rows(const double[::1] y, double mu, double var,
             const double[::1] dmu, const double[::1] dvar, double tau):
    """Per-observation score Psi_tau for m = 1; returns an ``(n, d)`` array."""
    cdef Py_ssize_t i, k, n = y.shape[0], d = dmu.shape[0]
    cdef double coef = (tau + 1.0) / (2.0 * pow(2.0 * 3.141592653589793 * var, 0.5 * tau))
    cdef double b = tau / pow(1.0 + tau, 1.5)
    cdef double r, z, e, tr
    out = np.empty((n, d), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(n):
            r = y[i] - mu
            z = r / var
            e = _clamped_exp(-0.5 * tau * r * z)
            for k in range(d):
                tr = dvar[k] / var
                o[i, k] = coef * ((-tr + 2.0 * dmu[k] * z + z * z * dvar[k]) * e + b * tr)
    return out


def psi_sum(const double[::1] y, double mu, double var,
            const double[::1] dmu, const double[::1] dvar, double tau):
    """Column sums of :func:`psi_rows` without materializing the matrix."""
    cdef Py_ssize_t i, k, kb, lo, hi, n = y.shape[0], d = dmu.shape[0]
    cdef double coef = (tau + 1.0) / (2.0 * pow(2.0 * 3.141592653589793 * var, 0.5 * tau))
    cdef double b = tau / pow(1.0 + tau, 1.5)
    cdef double r, z, e, b0, b1, b2
    cdef double s0 = 0.0, c0 = 0.0, s1 = 0.0, c1 = 0.0, s2 = 0.0, c2 = 0.0
    with nogil:
        # Psi_k = coef * [(-tr_k + 2 dmu_k z + dvar_k z^2) e + b tr_k], so three
        # sums over observations cover every coordinate.
        for kb in range((n + BLOCK - 1) // BLOCK):
            lo = kb * BLOCK
            hi = lo + BLOCK if lo + BLOCK < n else n
            b0 = 0.0
            b1 = 0.0
            b2 = 0.0
            for i in range(lo, hi):
                r = y[i] - mu
                z = r / var
                e = _clamped_exp(-0.5 * tau * r * z)
                b0 = b0 + e
                b1 = b1 + z * e
                b2 = b2 + z * z * e
            _neumaier(&s0, &c0, b0)
            _neumaier(&s1, &c1, b1)
            _neumaier(&s2, &c2, b2)
    s0 = _total(s0, c0)
    s1 = _total(s1, c1)
    s2 = _total(s2, c2)
    out = np.empty(d, dtype=np.float64)
    for k in range(d):
        out[k] = coef * (-(dvar[k] / var) * s0 + 2.0 * dmu[k] * s1 + dvar[k] * s2
                         + n * b * dvar[k] / var)
    return out


def exp_rao_sums(const double[:, ::1] y, double theta0, double tau):
    """Row sums of ``(y^2 - y t - t^2) w + tau t^2 / (1+tau)^1.5`` (exponential score numerator)."""
    cdef Py_ssize_t i, j, reps = y.shape[0], n = y.shape[1]
    cdef double t2 = theta0 * theta0
    cdef double shift = tau * t2 / pow(1.0 + tau, 1.5)
    cdef double v, u, s, c, blk
    out = np.empty(reps, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(reps):
            s = 0.0
            c = 0.0
            blk = 0.0
            for j in range(n):
                if j % BLOCK == 0 and j > 0:
                    _neumaier(&s, &c, blk)
                    blk = 0.0
                v = y[i, j]
                u = (v - theta0) / theta0
                blk = blk + (v * v - v * theta0 - t2) * _clamped_exp(-0.5 * tau * u * u) + shift
            _neumaier(&s, &c, blk)
            o[i] = _total(s, c)
    return out


def poisson_rao_sums(const double[:, ::1] y, double theta0, double tau):
    """Row sums of ``(y^2 - t^2 - t) w + tau t / (1+tau)^1.5`` (Poisson score numerator)."""
    cdef Py_ssize_t i, j, reps = y.shape[0], n = y.shape[1]
    cdef double shift = tau * theta0 / pow(1.0 + tau, 1.5)
    cdef double base = theta0 * theta0 + theta0
    cdef double v, r, s, c, blk
    out = np.empty(reps, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(reps):
            s = 0.0
            c = 0.0
            blk = 0.0
            for j in range(n):
                if j % BLOCK == 0 and j > 0:
                    _neumaier(&s, &c, blk)
                    blk = 0.0
                v = y[i, j]
                r = v - theta0
                blk = blk + (v * v - base) * _clamped_exp(-0.5 * tau * r * r / theta0) + shift
            _neumaier(&s, &c, blk)
            o[i] = _total(s, c)
    return out


def mdpde_exp_sums(const double[:, ::1] y, double theta0, double beta):
    """Row sums of ``(y - t) exp(-beta y / t)`` for the parametric exponential MDPDE score."""
    cdef Py_ssize_t i, j, reps = y.shape[0], n = y.shape[1]
    cdef double v, s, c, blk
    out = np.empty(reps, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(reps):
            s = 0.0
            c = 0.0
            blk = 0.0
            for j in range(n):
                if j % BLOCK == 0 and j > 0:
                    _neumaier(&s, &c, blk)
                    blk = 0.0
                v = y[i, j]
                blk = blk + (v - theta0) * _clamped_exp(-beta * v / theta0)
            _neumaier(&s, &c, blk)
            o[i] = _total(s, c)
    return out
