"""Backend selection for the scalar-observation inner loops.

The compiled Cython module is used when it was built; otherwise, or when
the environment variable ``DPDG_PURE_PYTHON=1`` is set, the NumPy versions
are used.  ``BACKEND`` records which one is active.
"""

import os

import numpy as np

from . import _kernels_py

_FUNCS = ("weight_sum", "psi_rows", "psi_sum", "exp_rao_sums", "poisson_rao_sums", "mdpde_exp_sums")

if os.environ.get("DPDG_PURE_PYTHON") == "1":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"


def _vec(x):
    return np.ascontiguousarray(x, dtype=np.float64).reshape(-1)


def _mat(x):
    return np.ascontiguousarray(np.atleast_2d(x), dtype=np.float64)


def weight_sum(y, mu, var, tau):
    return _impl.weight_sum(_vec(y), float(mu), float(var), float(tau))


def psi_rows(y, mu, var, dmu, dvar, tau):
    return _impl.psi_rows(_vec(y), float(mu), float(var), _vec(dmu), _vec(dvar), float(tau))


def psi_sum(y, mu, var, dmu, dvar, tau):
    return _impl.psi_sum(_vec(y), float(mu), float(var), _vec(dmu), _vec(dvar), float(tau))


def exp_rao_sums(y, theta0, tau):
    return _impl.exp_rao_sums(_mat(y), float(theta0), float(tau))


def poisson_rao_sums(y, theta0, tau):
    return _impl.poisson_rao_sums(_mat(y), float(theta0), float(tau))


def mdpde_exp_sums(y, theta0, beta):
    return _impl.mdpde_exp_sums(_mat(y), float(theta0), float(beta))


def implementations():
    """Both backends keyed by name (the compiled one only if importable)."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels
        out["cython"] = _kernels
    except ImportError:
        pass
    return out
