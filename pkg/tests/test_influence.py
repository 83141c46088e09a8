import csv
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dpdgauss import (
    RngStream,
    fit_mdpdge,
    fix_constraint,
    get_preset,
    influence_curve,
    influence_restricted,
    influence_unrestricted,
    matrix_j,
    no_constraint,
    point_constraint,
    psi,
    sample_model_normal,
)
from dpdgauss.influence import restricted_influence_from_matrices, write_influence_csv
from dpdgauss.models import ConstraintSet, constraint_eval


def test_unrestricted_examples():
    exp = get_preset("exponential")
    assert influence_unrestricted(exp, [4.0], 0.0, [4.0])[0] == pytest.approx(-4 / 3, rel=1e-14)
    assert influence_unrestricted(exp, [1.0], 0.0, [(1 + math.sqrt(5)) / 2])[0] == pytest.approx(0.0, abs=1e-14)


def test_unrestricted_is_j_inverse_psi():
    model = get_preset("normal1d")
    theta, tau, y = [0.5, 2.0], 0.3, [1.9]
    expected = np.linalg.solve(matrix_j(model, theta, tau), psi(y, model, theta, tau))
    np.testing.assert_allclose(influence_unrestricted(model, theta, tau, y), expected, rtol=1e-13)
    np.testing.assert_allclose(influence_unrestricted(model, theta, tau, y, normalized=True), expected / 1.3,
                               rtol=1e-13)


def test_bounded_versus_unbounded():
    exp = get_preset("exponential")
    grid = np.linspace(0, 100, 2001)
    c0, c8 = influence_curve(exp, [4.0], [0.0, 0.8], grid)
    a0, a8 = np.abs(c0.values[:, 0]), np.abs(c8.values[:, 0])
    assert np.argmax(a0) == len(grid) - 1
    assert 0 < np.argmax(a8) < len(grid) - 1


def test_curve_shapes():
    exp = get_preset("exponential")
    grid = np.linspace(0, 15, 301)
    c0, c2, c8 = influence_curve(exp, [4.0], [0.0, 0.2, 0.8], grid)
    root = 4 * (1 + math.sqrt(5)) / 2
    beyond = np.abs(c0.values[grid > root, 0])
    assert np.all(np.diff(beyond) > 0)
    far = np.linspace(20, 200, 200)
    for tau in (0.2, 0.8):
        tail = np.abs(influence_curve(exp, [4.0], [tau], far)[0].values[:, 0])
        assert tail[-1] < tail.max()
        assert np.all(np.diff(tail[np.argmax(tail):]) <= 0)
    empty = influence_curve(exp, [4.0], [0.3], [])[0]
    assert empty.values.shape == (0, 1)
    assert c2.values.shape == (301, 1)


def test_sup_stabilizes_only_for_positive_tau():
    exp = get_preset("exponential")

    def sup(tau, top):
        grid = np.concatenate([np.linspace(0, 100, 20001), np.linspace(100, top, 20001)])
        return np.abs(influence_curve(exp, [4.0], [tau], grid)[0].values).max()

    for tau in (0.2, 0.8):
        assert abs(sup(tau, 1e6) / sup(tau, 1e5) - 1) < 1e-6
    assert sup(0.0, 1e6) > 50 * sup(0.0, 1e5)


def test_restricted_examples():
    J = np.eye(2)
    G = np.array([[1.0], [0.0]])
    np.testing.assert_allclose(restricted_influence_from_matrices(J, G, [3.0, 5.0]), [0.0, 5.0], atol=1e-15)
    model = get_preset("exponential")
    np.testing.assert_allclose(influence_restricted(model, [2.0], 0.3, point_constraint([2.0]), [7.0]), 0.0,
                               atol=1e-15)
    model = get_preset("normal1d")
    np.testing.assert_allclose(influence_restricted(model, [0.1, 1.2], 0.4, no_constraint(2), [2.2]),
                               influence_unrestricted(model, [0.1, 1.2], 0.4, [2.2]), rtol=1e-12)


def test_stacked_form_is_least_squares():
    J = np.eye(2)
    G = np.array([[1.0], [0.0]])
    out = restricted_influence_from_matrices(J, G, [3.0, 5.0], form="stacked")
    np.testing.assert_allclose(out, [1.5, 5.0], rtol=1e-15)
    with pytest.raises(ValueError):
        restricted_influence_from_matrices(J, G, [3.0, 5.0], form="other")


@pytest.mark.parametrize("fixed", [{0: 0.0}, {1: 1.0}, {0: 0.0, 3: 0.2}])
def test_restricted_annihilates_constraint_directions(fixed):
    rng = np.random.default_rng(17)
    model = get_preset("mvnormal")
    cons = fix_constraint(model.d, fixed)
    theta = np.array([0.1, -0.3, 1.5, 0.2, 0.8])
    _, G = constraint_eval(cons, theta)
    for _ in range(100):
        y = rng.normal(0, 3, size=2)
        tau = rng.uniform(0, 1)
        val = influence_restricted(model, theta, tau, cons, y)
        assert np.max(np.abs(G.T @ val)) < 1e-10


def test_restricted_general_constraint():
    model = get_preset("normal1d")
    cons = ConstraintSet(d=2, r=1, g_fn=lambda t: np.array([t[0] * t[1] - 1.0]))
    theta = [2.0, 0.5]
    _, G = constraint_eval(cons, theta)
    for y in np.linspace(-5, 5, 100):
        assert abs(float(G[:, 0] @ influence_restricted(model, theta, 0.3, cons, [y]))) < 1e-10


@given(st.floats(-100, 100), st.floats(-100, 100))
def test_restricted_property_random_psi(a, b):
    J = np.array([[2.0, 0.3], [0.3, 1.0]])
    G = np.array([[1.0], [-1.0]])
    val = restricted_influence_from_matrices(J, G, [a, b])
    assert abs(float(G[:, 0] @ val)) < 1e-10 * max(1.0, abs(a), abs(b))


@pytest.mark.parametrize("tau", [0.0, 0.3])
def test_gateaux_link(tau):
    model = get_preset("exponential")
    n = 10 ** 5
    y = sample_model_normal(model, [2.0], n, RngStream(71, 0))
    base = fit_mdpdge(y, model, tau, tol=1e-13)
    theta = base.theta_hat
    for y0 in (0.5, 6.0):
        z = y.copy()
        z[0, 0] = y0
        moved = fit_mdpdge(z, model, tau, theta0=theta, tol=1e-13).theta_hat[0]
        fd = (moved - theta[0]) * n
        fd -= (fit_mdpdge(np.delete(y, 0, axis=0), model, tau, theta0=theta, tol=1e-13).theta_hat[0]
               - theta[0]) * n
        exact = influence_unrestricted(model, theta, tau, [y0], normalized=True)[0]
        assert fd == pytest.approx(exact, rel=0.1)


def test_csv_schema(tmp_path):
    curves = influence_curve(get_preset("exponential"), [4.0], [0.0, 0.2, 0.8], np.linspace(0, 15, 100))
    path = tmp_path / "if.csv"
    write_influence_csv(curves, path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["y", "tau", "if_1"]
    assert len(rows) == 301
    assert float(rows[5][2]) == curves[0].values[4, 0]
