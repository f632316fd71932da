"""Convex conjugation: closed forms, involution, experiments."""

import numpy as np
import pytest

from mkpot.legendre import (
    ConjugateFunction,
    ConvexityError,
    QuadPlusTrig,
    QuadraticPotential,
    SampledConvex,
    legendre_experiment,
    legendre_transform,
)
from mkpot.semiflat import manufactured_problem, semiflat_newton


def test_quadratic_closed_form():
    a = np.diag([1.0, 2.0, 4.0])
    ys = [np.linspace(-3, 3, 9)] * 3
    res = legendre_transform(QuadraticPotential(a), ys)
    Y = np.stack(np.meshgrid(*ys, indexing="ij"), axis=-1)
    expect = 0.5 * (Y[..., 0] ** 2 / 1.0 + Y[..., 1] ** 2 / 2.0 + Y[..., 2] ** 2 / 4.0)
    assert np.abs(res.values - expect).max() <= 1e-12
    assert not res.boundary.any()


def test_one_dimensional_self_dual():
    ys = [np.linspace(-2, 2, 11)]
    res = legendre_transform(QuadraticPotential([[1.0]]), ys)
    assert np.abs(res.values - 0.5 * ys[0] ** 2).max() <= 1e-13


def test_convexity_rejected():
    with pytest.raises(ConvexityError):
        QuadraticPotential(np.diag([1.0, -1.0, 1.0]))
    with pytest.raises(ConvexityError):
        QuadPlusTrig(np.eye(3) * 0.01, [((1, 0, 0), "cos", 1.0)])


def test_double_conjugate_callable():
    qt = QuadPlusTrig(np.eye(3), [((1, 1, 0), "sin", 0.05)])
    ddual = ConjugateFunction(ConjugateFunction(qt))
    pts = np.random.default_rng(0).uniform(-1.5, 1.5, size=(200, 3))
    assert np.abs(ddual.value(pts) - qt.value(pts)).max() <= 1e-8


def test_sampled_involution():
    delta = 0.005
    n = 64
    grid = np.linspace(-2.4, 2.4, n)
    X = np.stack(np.meshgrid(grid, grid, grid, indexing="ij"), axis=-1)
    vals = (0.5 * (X[..., 0] ** 2 + 1.5 * X[..., 1] ** 2 + X[..., 2] ** 2)
            + delta * np.cos(X[..., 0]) * np.cos(X[..., 1]))
    sc = SampledConvex(vals, [grid] * 3)
    ys = [np.linspace(-2.2, 2.2, n)] * 3
    first = legendre_transform(sc, ys)
    back = legendre_transform(SampledConvex(first.values, ys),
                              [np.linspace(-0.8, 0.8, 7)] * 3)
    Xb = np.stack(np.meshgrid(*back.grids, indexing="ij"), axis=-1)
    orig = (0.5 * (Xb[..., 0] ** 2 + 1.5 * Xb[..., 1] ** 2 + Xb[..., 2] ** 2)
            + delta * np.cos(Xb[..., 0]) * np.cos(Xb[..., 1]))
    ok = ~back.boundary
    assert ok.any()
    assert np.abs(back.values - orig)[ok].max() <= 1e-8


def test_boundary_flag_outside_gradient_image():
    n = 48
    grid = np.linspace(-1.0, 1.0, n)
    X = np.stack(np.meshgrid(grid, grid, grid, indexing="ij"), axis=-1)
    sc = SampledConvex(0.5 * np.sum(X ** 2, axis=-1), [grid] * 3)
    res = legendre_transform(sc, [np.linspace(-3.0, 3.0, 5)] * 3)
    # gradient image is [-1,1]^3; |y| = 3 nodes must be flagged
    assert res.boundary.reshape(-1)[0]


def test_experiment_full_quadratic_closed_form():
    rep = legendre_experiment(QuadraticPotential(np.diag([1.0, 2.0, 4.0])), n_y=16)
    assert rep.closed_form == pytest.approx((1 + 2 + 4) / (1 * 2 * 4.0))
    assert rep.residual_mean == pytest.approx(rep.closed_form, abs=1e-10)
    assert rep.constancy_deviation <= 1e-10


def test_experiment_partial_quadratic_closed_form():
    a, b, c = 1.0, 2.0, 4.0
    rep = legendre_experiment(QuadraticPotential(np.diag([a, b, c])), subset=(0,), n_y=16)
    eig = np.array([1.0 / a, -b, -c])
    expected = eig[0] * eig[1] + eig[0] * eig[2] + eig[1] * eig[2]
    assert rep.closed_form == pytest.approx(expected)
    assert rep.residual_mean == pytest.approx(expected, abs=1e-9)
    assert rep.constancy_deviation <= 1e-9


def test_experiment_on_solver_output_reports_statistics():
    prob, _ = manufactured_problem(24, 0.05, "discrete")
    sol, rep_solver = semiflat_newton(prob)
    assert rep_solver.status == "converged"
    rep = legendre_experiment(sol, n_y=16)
    # measured, not asserted constant: the report must carry the statistics
    assert rep.interior_nodes > 0
    assert rep.residual_min <= rep.residual_mean <= rep.residual_max
    assert rep.constancy_deviation >= 0.0
    d = rep.as_dict()
    assert set(d) >= {"residual_mean", "constancy_deviation", "subset"}
