"""Mean/covariance working models, equality constraints and built-in presets.

A model only has to say how the mean vector and covariance matrix of one
observation depend on the parameter vector; everything downstream treats
the observation as if it were Gaussian with those two moments.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, NamedTuple, Optional

import numpy as np

from .errors import DomainError, InvalidConstraint, NotSPD

__all__ = [
    "MeanCovModel",
    "ConstraintSet",
    "ModelState",
    "PRESETS",
    "as_sample",
    "as_theta",
    "model_eval",
    "model_derivs",
    "model_state",
    "constraint_eval",
    "exponential_model",
    "poisson_model",
    "normal1d_model",
    "mvnormal_model",
    "get_preset",
    "fix_constraint",
    "point_constraint",
    "no_constraint",
    "central_jacobian",
]

FD_REL_STEP = 1e-6


def central_jacobian(fn, theta, h_rel=FD_REL_STEP):
    """Central-difference derivatives of ``fn`` with respect to each coordinate.

    Returns an array whose leading axis indexes the coordinate of ``theta``;
    the trailing axes follow the shape of ``fn(theta)``.
    """
    theta = np.asarray(theta, dtype=float)
    out = []
    for i in range(theta.size):
        h = h_rel * max(1.0, abs(theta[i]))
        tp = theta.copy()
        tm = theta.copy()
        tp[i] += h
        tm[i] -= h
        out.append((np.asarray(fn(tp), float) - np.asarray(fn(tm), float)) / (2 * h))
    if not out:
        return np.zeros((0,) + np.shape(fn(theta)))
    return np.stack(out)


def as_theta(theta, d=None):
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.ndim != 1:
        raise ValueError("parameter vector must be one-dimensional")
    if d is not None and theta.size != d:
        raise ValueError(f"parameter vector has length {theta.size}, model expects {d}")
    if not np.all(np.isfinite(theta)):
        raise DomainError("parameter vector has non-finite entries")
    return theta


def as_sample(data, m=None):
    """Coerce ``data`` to an ``(n, m)`` float array of observations."""
    y = np.asarray(data, dtype=float)
    if y.ndim == 0:
        y = y.reshape(1, 1)
    elif y.ndim == 1:
        y = y.reshape(-1, 1) if (m is None or m == 1) else y.reshape(1, -1)
    if y.ndim != 2 or y.shape[0] < 1 or y.shape[1] < 1:
        raise ValueError("sample must be a non-empty n x m matrix")
    if m is not None and y.shape[1] != m:
        raise ValueError(f"sample has {y.shape[1]} columns, model expects m={m}")
    if not np.all(np.isfinite(y)):
        raise ValueError("sample contains non-finite values")
    return y


@dataclass(frozen=True)
class MeanCovModel:
    """Parametric model known only through ``mu(theta)`` and ``Sigma(theta)``.

    ``mean_derivs(theta)`` returns a ``(d, m)`` array whose row ``i`` is
    d mu / d theta_i, and ``cov_derivs(theta)`` a ``(d, m, m)`` array.  When
    either is omitted, central finite differences are used instead.  The
    domain is the open box ``lower < theta < upper``.
    """

    d: int
    m: int
    mean_fn: Callable[[np.ndarray], np.ndarray]
    cov_fn: Callable[[np.ndarray], np.ndarray]
    mean_derivs: Optional[Callable[[np.ndarray], np.ndarray]] = None
    cov_derivs: Optional[Callable[[np.ndarray], np.ndarray]] = None
    lower: tuple = ()
    upper: tuple = ()
    name: str = "custom"
    c_y: float = 1.0
    plug_in: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)

    def __post_init__(self):
        lower = tuple(self.lower) if len(self.lower) else (-np.inf,) * self.d
        upper = tuple(self.upper) if len(self.upper) else (np.inf,) * self.d
        if len(lower) != self.d or len(upper) != self.d:
            raise ValueError("domain bounds must have one entry per parameter")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    def in_domain(self, theta):
        theta = np.asarray(theta, dtype=float)
        return bool(
            theta.shape == (self.d,)
            and np.all(np.isfinite(theta))
            and np.all(theta > np.asarray(self.lower))
            and np.all(theta < np.asarray(self.upper))
        )

    def check(self, theta):
        theta = as_theta(theta, self.d)
        if not self.in_domain(theta):
            raise DomainError(f"theta={theta.tolist()} outside the domain of model {self.name!r}")
        return theta

    def project(self, theta, margin=1e-6):
        """Clip ``theta`` into the domain box, ``margin`` away from finite bounds."""
        theta = np.array(theta, dtype=float)
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        fin_lo, fin_hi = np.isfinite(lo), np.isfinite(hi)
        lo_m = np.full(lo.shape, -np.inf)
        hi_m = np.full(hi.shape, np.inf)
        lo_m[fin_lo] = lo[fin_lo] + margin * np.maximum(1.0, np.abs(lo[fin_lo]))
        hi_m[fin_hi] = hi[fin_hi] - margin * np.maximum(1.0, np.abs(hi[fin_hi]))
        return np.clip(theta, lo_m, hi_m)


class ModelState(NamedTuple):
    """Everything the objective, score and asymptotic matrices need at one theta."""

    theta: np.ndarray
    mu: np.ndarray        # (m,)
    cov: np.ndarray       # (m, m)
    chol: np.ndarray      # lower Cholesky factor of cov
    logdet: float
    cov_inv: np.ndarray   # (m, m)
    dmu: np.ndarray       # (d, m)
    dcov: np.ndarray      # (d, m, m)


def _cholesky(cov, name):
    cov = np.asarray(cov, dtype=float)
    asym = np.max(np.abs(cov - cov.T)) if cov.size else 0.0
    if asym > 1e-10 * max(1.0, np.max(np.abs(cov))):
        raise NotSPD(f"covariance of model {name!r} is not symmetric (max asymmetry {asym:.3g})")
    try:
        return np.linalg.cholesky(0.5 * (cov + cov.T))
    except np.linalg.LinAlgError as exc:
        raise NotSPD(f"covariance of model {name!r} is not positive definite") from exc


def model_eval(model, theta):
    """Return ``(mu, Sigma)`` at ``theta``; Sigma is verified SPD."""
    theta = model.check(theta)
    mu = np.atleast_1d(np.asarray(model.mean_fn(theta), dtype=float)).reshape(model.m)
    cov = np.atleast_2d(np.asarray(model.cov_fn(theta), dtype=float)).reshape(model.m, model.m)
    _cholesky(cov, model.name)
    return mu, cov


def model_derivs(model, theta):
    """Return ``(dmu, dSigma)`` with shapes ``(d, m)`` and ``(d, m, m)``.

    Analytic derivatives are used when the model supplies them, otherwise
    central differences with step ``1e-6 * max(1, |theta_i|)``.
    """
    theta = model.check(theta)
    d, m = model.d, model.m

    if model.mean_derivs is not None:
        dmu = np.asarray(model.mean_derivs(theta), dtype=float).reshape(d, m)
    else:
        dmu = central_jacobian(model.mean_fn, theta).reshape(d, m)
    if model.cov_derivs is not None:
        dcov = np.asarray(model.cov_derivs(theta), dtype=float).reshape(d, m, m)
    else:
        dcov = central_jacobian(model.cov_fn, theta).reshape(d, m, m)
    return dmu, dcov


def model_state(model, theta):
    theta = model.check(theta)
    mu, cov = model_eval(model, theta)
    chol = _cholesky(cov, model.name)
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
    eye = np.eye(model.m)
    linv = np.linalg.solve(chol, eye)
    cov_inv = linv.T @ linv
    dmu, dcov = model_derivs(model, theta)
    return ModelState(theta, mu, cov, chol, logdet, cov_inv, dmu, dcov)


# -- presets -----------------------------------------------------------------

def _mean_plug_in(y):
    return np.array([np.mean(y[:, 0])])


def exponential_model():
    """Scale-parametrized exponential: mean theta, variance theta**2."""
    return MeanCovModel(
        d=1, m=1,
        mean_fn=lambda t: np.array([t[0]]),
        cov_fn=lambda t: np.array([[t[0] ** 2]]),
        mean_derivs=lambda t: np.array([[1.0]]),
        cov_derivs=lambda t: np.array([[[2.0 * t[0]]]]),
        lower=(0.0,), upper=(np.inf,),
        name="exponential",
        plug_in=_mean_plug_in,
    )


def poisson_model():
    return MeanCovModel(
        d=1, m=1,
        mean_fn=lambda t: np.array([t[0]]),
        cov_fn=lambda t: np.array([[t[0]]]),
        mean_derivs=lambda t: np.array([[1.0]]),
        cov_derivs=lambda t: np.array([[[1.0]]]),
        lower=(0.0,), upper=(np.inf,),
        name="poisson",
        plug_in=_mean_plug_in,
    )


def normal1d_model():
    """Univariate location/variance model, theta = (mean, variance)."""
    def plug_in(y):
        return np.array([np.mean(y[:, 0]), np.var(y[:, 0])])

    return MeanCovModel(
        d=2, m=1,
        mean_fn=lambda t: np.array([t[0]]),
        cov_fn=lambda t: np.array([[t[1]]]),
        mean_derivs=lambda t: np.array([[1.0], [0.0]]),
        cov_derivs=lambda t: np.array([[[0.0]], [[1.0]]]),
        lower=(-np.inf, 0.0), upper=(np.inf, np.inf),
        name="normal1d",
        plug_in=plug_in,
    )


def _tril_pairs(m):
    return [(i, j) for i in range(m) for j in range(i + 1)]


def mvnormal_model(m=2, c_y=1.0):
    """Multivariate model with theta = (mu, lower triangle of Sigma, row-major).

    The reported covariance is ``c_y * Sigma``; ``c_y = 1`` is the normal
    member of the elliptical family.  d = m + m(m+1)/2.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if not c_y > 0:
        raise ValueError("c_y must be positive")
    pairs = _tril_pairs(m)
    d = m + len(pairs)
    rows = np.array([p[0] for p in pairs])
    cols = np.array([p[1] for p in pairs])

    def scatter(t):
        s = np.zeros((m, m))
        s[rows, cols] = t[m:]
        s[cols, rows] = t[m:]
        return s

    def cov_fn(t):
        return c_y * scatter(t)

    def mean_derivs(t):
        dmu = np.zeros((d, m))
        dmu[np.arange(m), np.arange(m)] = 1.0
        return dmu

    dcov_const = np.zeros((d, m, m))
    for k, (i, j) in enumerate(pairs):
        dcov_const[m + k, i, j] = c_y
        dcov_const[m + k, j, i] = c_y

    def plug_in(y):
        mean = y.mean(axis=0)
        cov = np.atleast_2d(np.cov(y, rowvar=False, bias=True)) / c_y
        return np.concatenate([mean, cov[rows, cols]])

    lower = [-np.inf] * m + [0.0 if i == j else -np.inf for i, j in pairs]
    return MeanCovModel(
        d=d, m=m,
        mean_fn=lambda t: np.asarray(t[:m], dtype=float),
        cov_fn=cov_fn,
        mean_derivs=mean_derivs,
        cov_derivs=lambda t: dcov_const,
        lower=tuple(lower), upper=(np.inf,) * d,
        name="mvnormal",
        c_y=c_y,
        plug_in=plug_in,
    )


PRESETS = ("exponential", "poisson", "normal1d", "mvnormal")


def get_preset(name, m=2, c_y=1.0):
    if name == "exponential":
        return exponential_model()
    if name == "poisson":
        return poisson_model()
    if name == "normal1d":
        return normal1d_model()
    if name == "mvnormal":
        return mvnormal_model(m=m, c_y=c_y)
    raise KeyError(f"unknown model preset {name!r}; choose from {', '.join(PRESETS)}")


# -- constraints ---------------------------------------------------------------

@dataclass(frozen=True)
class ConstraintSet:
    """Equality restrictions ``g(theta) = 0_r`` with d x r Jacobian ``G``.

    ``fixed`` maps 0-based coordinates to values for pure coordinate-fixing
    constraints; solvers use it to keep those coordinates exact.
    """

    d: int
    r: int
    g_fn: Callable[[np.ndarray], np.ndarray]
    jac_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    fixed: Optional[Mapping[int, float]] = None
    name: str = "custom"


def constraint_eval(constraint, theta):
    """Return ``(g, G)`` with shapes ``(r,)`` and ``(d, r)``."""
    theta = as_theta(theta, constraint.d)
    r = constraint.r
    if r == 0:
        return np.zeros(0), np.zeros((constraint.d, 0))
    g = np.atleast_1d(np.asarray(constraint.g_fn(theta), dtype=float)).reshape(r)
    if constraint.jac_fn is not None:
        G = np.asarray(constraint.jac_fn(theta), dtype=float).reshape(constraint.d, r)
    else:
        G = central_jacobian(constraint.g_fn, theta).reshape(constraint.d, r)
    return g, G


def fix_constraint(d, fixed):
    """Constraint fixing coordinates: ``theta[i] = v`` for each ``i: v`` in ``fixed``."""
    fixed = {int(i): float(v) for i, v in dict(fixed).items()}
    idx = sorted(fixed)
    if not idx:
        return no_constraint(d)
    if idx[0] < 0 or idx[-1] >= d:
        raise InvalidConstraint(f"fixed coordinate out of range for d={d}: {idx}")
    vals = np.array([fixed[i] for i in idx])
    G = np.zeros((d, len(idx)))
    G[idx, np.arange(len(idx))] = 1.0
    return ConstraintSet(
        d=d, r=len(idx),
        g_fn=lambda t: np.asarray(t, float)[idx] - vals,
        jac_fn=lambda t: G,
        fixed=fixed,
        name="fix:" + ",".join(f"{i + 1}={fixed[i]:g}" for i in idx),
    )


def point_constraint(theta0):
    """``g(theta) = theta - theta0``: the simple null written as a restriction."""
    theta0 = as_theta(theta0)
    return fix_constraint(theta0.size, dict(enumerate(theta0)))


def no_constraint(d):
    return ConstraintSet(d=d, r=0, g_fn=lambda t: np.zeros(0),
                         jac_fn=lambda t: np.zeros((d, 0)), fixed={}, name="none")
