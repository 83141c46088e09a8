import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from dpdgauss import kernels
from dpdgauss.kernels import implementations

IMPLS = implementations()
needs_compiled = pytest.mark.skipif("cython" not in IMPLS, reason="compiled kernels not built")

finite = st.floats(-1e3, 1e3, allow_nan=False)


def _pair(name, *args):
    return (np.asarray(getattr(IMPLS["python"], name)(*args), float),
            np.asarray(getattr(IMPLS["cython"], name)(*args), float))


@needs_compiled
@given(hnp.arrays(np.float64, st.integers(1, 700), elements=finite), st.floats(-5, 5), st.floats(0.1, 10),
       st.floats(0, 2))
def test_scalar_kernels_agree(y, mu, var, tau):
    dmu, dvar = np.array([1.0, 0.0]), np.array([2.0 * mu, 1.0])
    for name, args in (("weight_sum", (y, mu, var, tau)),
                       ("psi_rows", (y, mu, var, dmu, dvar, tau)),
                       ("psi_sum", (y, mu, var, dmu, dvar, tau))):
        a, b = _pair(name, *args)
        np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-10 * max(1.0, np.abs(a).max()))


@needs_compiled
@given(hnp.arrays(np.float64, st.tuples(st.integers(1, 20), st.integers(1, 300)), elements=st.floats(0, 100)),
       st.floats(0.2, 5), st.floats(0, 1))
def test_batch_kernels_agree(y, theta0, tau):
    for name in ("exp_rao_sums", "poisson_rao_sums", "mdpde_exp_sums"):
        a, b = _pair(name, y, theta0, tau)
        np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-9 * max(1.0, np.abs(a).max()))


def test_weight_sum_exact_small_case():
    y = np.array([0.0, 1.0, 2.0])
    se, sq = kernels.weight_sum(y, 1.0, 4.0, 0.5)
    q = (y - 1.0) ** 2 / 4.0
    assert se == pytest.approx(math.fsum(np.exp(-0.25 * q)), rel=1e-15)
    assert sq == pytest.approx(math.fsum(q), rel=1e-15)


def test_extreme_values_underflow_to_zero():
    for impl in IMPLS.values():
        se, sq = impl.weight_sum(np.array([0.0, 1e200]), 0.0, 1.0, 1.0)
        assert se == 1.0 and math.isinf(sq)


def test_long_sum_is_accurate():
    y = np.random.default_rng(0).normal(size=200_001)
    se, _ = kernels.weight_sum(y, 0.0, 1.0, 0.3)
    assert se == pytest.approx(math.fsum(np.exp(-0.15 * y * y)), rel=1e-14)


def test_pure_python_switch():
    env = dict(os.environ, DPDG_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import dpdgauss; print(dpdgauss.BACKEND)"], env=env,
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
