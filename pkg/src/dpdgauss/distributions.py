"""Chi-square distribution functions and reproducible samplers.

The regularized incomplete gamma function uses the power series below
``x = a + 1`` and a Lentz continued fraction above it.  The noncentral
chi-square CDF is the Poisson mixture of central terms, summed outward from
the mixture mode until the remaining weight is negligible.

Random streams are Philox generators keyed by ``(master_seed, stream_id)``.
Philox is counter based, so a stream depends only on its key and never on
how many other streams exist or which worker draws from it.
"""

import hashlib
import math
import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .models import model_eval, _cholesky

__all__ = [
    "gammainc_lower",
    "gammainc_upper",
    "chisq_cdf",
    "chisq_sf",
    "chisq_quantile",
    "RngStream",
    "stream_id_for",
    "MixtureSpec",
    "sample_exponential",
    "sample_contaminated_exponential",
    "contaminated_exponential_batch",
    "sample_model_normal",
    "sample_poisson",
]

_EPS = 1e-16
_TINY = 1e-300
_MAX_TERMS = 100000


def _gamma_series(a, x):
    # P(a, x) = x^a e^-x / Gamma(a+1) * sum_k x^k / ((a+1)...(a+k))
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_TERMS):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cf(a, x):
    # Modified Lentz evaluation of the continued fraction for Q(a, x).
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_TERMS):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gammainc_lower(a, x):
    """Regularized lower incomplete gamma ``P(a, x)``."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x <= 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < a + 1.0:
        return min(1.0, _gamma_series(a, x))
    return max(0.0, 1.0 - _gamma_cf(a, x))


def gammainc_upper(a, x):
    """Regularized upper incomplete gamma ``Q(a, x) = 1 - P(a, x)``."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x <= 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _gamma_series(a, x))
    return min(1.0, _gamma_cf(a, x))


def _poisson_mixture(fn, x, df, nc):
    """Sum ``w_j fn(df/2 + j, x/2)`` over Poisson(nc/2) weights ``w_j``.

    Terms are added outward from the mode.  Above the mode the weights decay
    at least geometrically, which bounds the neglected tail since
    ``0 <= fn <= 1``; summation stops once that bound drops below 1e-12 of
    the running total.
    """
    lam = 0.5 * nc
    if lam == 0.0:  # nc so small that halving it underflows
        return fn(0.5 * df, 0.5 * x)
    j0 = int(math.floor(lam))
    log_w0 = -lam + j0 * math.log(lam) - math.lgamma(j0 + 1.0)
    total = 0.0

    log_w = log_w0
    j = j0
    for _ in range(_MAX_TERMS):
        w = math.exp(log_w)
        total += w * fn(0.5 * df + j, 0.5 * x)
        j += 1
        log_w += math.log(lam) - math.log(j)
        ratio = lam / (j + 1.0)
        tail = math.exp(log_w) / (1.0 - ratio)
        if tail < 1e-12 * max(total, _TINY) or tail < 1e-300:
            break

    log_w = log_w0
    j = j0
    while j > 0:
        log_w += math.log(j) - math.log(lam)
        j -= 1
        w = math.exp(log_w)
        total += w * fn(0.5 * df + j, 0.5 * x)
        # below the mode weights shrink geometrically as j decreases
        if w * (j + 1) < 1e-13 * max(total, _TINY):
            break
    return min(1.0, max(0.0, total))


def chisq_cdf(x, df, noncentrality=0.0):
    """CDF of the (noncentral) chi-square distribution."""
    x = float(x)
    if df <= 0:
        raise ValueError("df must be positive")
    if noncentrality < 0:
        raise ValueError("noncentrality must be >= 0")
    if x <= 0:
        return 0.0
    if noncentrality == 0:
        return gammainc_lower(0.5 * df, 0.5 * x)
    # the truncated series loses ~1e-13 of weight; take the complement of the smaller tail
    if x > df + noncentrality:
        return 1.0 - _poisson_mixture(gammainc_upper, x, df, float(noncentrality))
    return _poisson_mixture(gammainc_lower, x, df, float(noncentrality))


def chisq_sf(x, df, noncentrality=0.0):
    """Survival function, computed directly for accuracy in the upper tail."""
    x = float(x)
    if df <= 0:
        raise ValueError("df must be positive")
    if noncentrality < 0:
        raise ValueError("noncentrality must be >= 0")
    if x <= 0:
        return 1.0
    if noncentrality == 0:
        return gammainc_upper(0.5 * df, 0.5 * x)
    if x <= df + noncentrality:
        return 1.0 - _poisson_mixture(gammainc_lower, x, df, float(noncentrality))
    return _poisson_mixture(gammainc_upper, x, df, float(noncentrality))


@lru_cache(maxsize=256)
def chisq_quantile(df, alpha):
    """Upper-``alpha`` quantile: the ``x`` with ``chisq_cdf(x, df) = 1 - alpha``."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if df <= 0:
        raise ValueError("df must be positive")
    target = 1.0 - alpha
    lo, hi = 0.0, max(1.0, float(df))
    while chisq_cdf(hi, df) < target:
        lo, hi = hi, 2.0 * hi
    # bisection to adjacent floats
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if chisq_cdf(mid, df) < target:
            lo = mid
        else:
            hi = mid
    return hi if abs(chisq_cdf(hi, df) - target) <= abs(chisq_cdf(lo, df) - target) else lo


# -- random streams ---------------------------------------------------------

_MASK64 = (1 << 64) - 1


def stream_id_for(*labels):
    """Stable 64-bit stream id for a tuple of labels (ints, floats, strings)."""
    h = hashlib.blake2b(digest_size=8)
    for lab in labels:
        if isinstance(lab, float):
            h.update(b"f" + struct.pack("<d", lab))
        elif isinstance(lab, (int, np.integer)):
            h.update(b"i" + str(int(lab)).encode())
        else:
            h.update(b"s" + str(lab).encode())
        h.update(b"|")
    return int.from_bytes(h.digest(), "little")


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream identified by ``(master_seed, stream_id)``."""

    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "master_seed", int(self.master_seed) & _MASK64)
        object.__setattr__(self, "stream_id", int(self.stream_id) & _MASK64)

    def generator(self):
        key = np.array([self.master_seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, *labels):
        return RngStream(self.master_seed, stream_id_for(self.stream_id, *labels))


def _gen(rng):
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    return RngStream(int(rng)).generator()


@dataclass(frozen=True)
class MixtureSpec:
    """``(1 - epsilon) Exp(theta0) + epsilon Exp(2 theta0)``, exponentials with mean (scale) theta."""

    theta0: float
    epsilon: float

    def __post_init__(self):
        if not self.theta0 > 0:
            raise ValueError("theta0 must be positive")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")

    def cdf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return ((1 - self.epsilon) * -np.expm1(-x / self.theta0)
                + self.epsilon * -np.expm1(-x / (2 * self.theta0)))


def sample_exponential(theta, n, rng):
    return (_gen(rng).standard_exponential(int(n)) * float(theta)).reshape(-1, 1)


def contaminated_exponential_batch(spec, reps, n, rng):
    """``(reps, n)`` matrix of independent mixture draws."""
    g = _gen(rng)
    shape = (int(reps), int(n))
    scale = np.full(shape, spec.theta0)
    if spec.epsilon > 0:
        scale[g.random(shape) < spec.epsilon] = 2.0 * spec.theta0
    return g.standard_exponential(shape) * scale


def sample_contaminated_exponential(spec, n, rng):
    """``n`` mixture draws as an ``(n, 1)`` sample."""
    return contaminated_exponential_batch(spec, 1, n, rng).reshape(-1, 1)


def sample_model_normal(model, theta, n, rng):
    """``n`` draws from ``N(mu(theta), Sigma(theta))`` via the Cholesky factor."""
    mu, cov = model_eval(model, theta)
    chol = _cholesky(cov, model.name)
    z = _gen(rng).standard_normal((int(n), model.m))
    return mu[None, :] + z @ chol.T


def sample_poisson(theta, n, rng):
    """Poisson draws as an ``(n, 1)`` float sample.

    Inversion against a tabulated CDF for ``theta <= 30``; above that,
    numpy's transformed-rejection sampler.
    """
    theta = float(theta)
    if not theta > 0:
        raise ValueError("theta must be positive")
    g = _gen(rng)
    if theta > 30:
        return g.poisson(theta, int(n)).astype(float).reshape(-1, 1)
    kmax = int(theta + 40.0 * math.sqrt(theta) + 40)
    k = np.arange(kmax + 1)
    logpmf = -theta + k * math.log(theta) - np.array([math.lgamma(i + 1.0) for i in k])
    cdf = np.cumsum(np.exp(logpmf))
    u = g.random(int(n))
    draws = np.minimum(np.searchsorted(cdf, u, side="right"), kmax)
    return draws.astype(float).reshape(-1, 1)
