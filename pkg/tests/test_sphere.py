import math

import numpy as np
import pytest
from hypothesis import given
from scipy.integrate import quad

from affcap import (DivergenceError, DomainError, SurfaceAreaMeasure, box,
                    build_rule, cosine_profile_from_atoms,
                    exact_2d_negative_square_integral,
                    integrate_negative_power, regular_polygon,
                    surface_area_measure)
from affcap.corpus import random_atoms
from affcap.sphere import profile_from_axes

from conftest import seeds


def _direct_h(directions, weights, theta):
    a = np.arctan2(directions[:, 1], directions[:, 0])
    return 0.5 * np.sum(weights * np.abs(np.cos(np.subtract.outer(theta, a))),
                        axis=-1)


def _adaptive(directions, weights):
    """Oracle: scipy adaptive quadrature of h^-2 split at every kink."""
    a = np.arctan2(directions[:, 1], directions[:, 0])
    kinks = np.sort(np.mod(np.concatenate([a + np.pi / 2, a - np.pi / 2]),
                           2 * np.pi))
    pts = np.unique(np.concatenate([[0.0], kinks, [2 * np.pi]]))
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        if hi - lo < 1e-15:
            continue
        v, _ = quad(lambda t: _direct_h(directions, weights, t) ** -2.0,
                    lo, hi, epsabs=0, epsrel=1e-13, limit=200)
        total += v
    return total


def test_rule_normalization():
    rule = build_rule(3, 32)
    assert rule.weights.sum() == pytest.approx(4 * math.pi, rel=1e-10)
    assert len(rule) == 2 * 32 ** 2
    np.testing.assert_allclose(np.linalg.norm(rule.nodes, axis=1), 1, atol=1e-14)


def test_rule_constant_and_quadratic():
    rule = build_rule(3, 32)
    v = integrate_negative_power(lambda u: np.ones(len(u)), 3, rule)
    assert v == pytest.approx(4 * math.pi, rel=1e-10)
    assert rule.integrate(lambda u: u[:, 2] ** 2) == pytest.approx(
        4 * math.pi / 3, rel=1e-8)


def test_rule_domain():
    with pytest.raises(DomainError):
        build_rule(2, 32)
    with pytest.raises(DomainError):
        build_rule(3, 2)


def test_ball_radius():
    rule = build_rule(3, 48)
    for r in (0.5, 2.0):
        v = integrate_negative_power(lambda u: np.full(len(u), r), 3, rule)
        assert v == pytest.approx(4 * math.pi * r ** -3, rel=1e-12)


def test_cube_projection_body():
    rule = build_rule(3, 48)
    v = integrate_negative_power(lambda u: np.abs(u).sum(axis=1), 3, rule)
    assert v == pytest.approx(4.0, rel=1e-3)


def test_degenerate_raises():
    rule = build_rule(3, 16)
    with pytest.raises(DivergenceError):
        integrate_negative_power(lambda u: np.maximum(u[:, 0], 0), 3, rule)


def test_exact_disk_and_square():
    one = profile_from_axes(np.array([0.0, np.pi / 2]), np.array([2.0, 2.0]))
    S = surface_area_measure(box([0, 0], [1, 1]))
    sq = cosine_profile_from_atoms(S)
    assert exact_2d_negative_square_integral(sq) == pytest.approx(4.0, rel=1e-14)
    assert exact_2d_negative_square_integral(sq.scaled(3.0)) == pytest.approx(
        4.0 / 9, rel=1e-14)
    assert exact_2d_negative_square_integral(one) == pytest.approx(4.0)
    disk = cosine_profile_from_atoms(surface_area_measure(
        regular_polygon(1 << 14, 1.0)))
    # h = 2 for the unit circle, so int h^-2 = 2 pi / 4
    assert exact_2d_negative_square_integral(disk) == pytest.approx(
        math.pi / 2, rel=1e-7)


def test_square_profile_arcs():
    S = surface_area_measure(box([0, 0], [1, 1]))
    prof = cosine_profile_from_atoms(S)
    assert len(prof) == 4
    assert prof(0.0) == pytest.approx(1.0, abs=1e-15)
    assert prof(math.pi / 4) == pytest.approx(math.sqrt(2), abs=1e-15)
    theta = np.linspace(0, 2 * np.pi, 97)
    np.testing.assert_allclose(prof(theta),
                               _direct_h(S.directions, S.weights, theta),
                               atol=1e-14)


def test_segment_profile_degenerate():
    S = SurfaceAreaMeasure(np.array([[0.0, 1.0], [0.0, -1.0]]), np.array([2.0, 2.0]))
    prof = cosine_profile_from_atoms(S)
    assert prof.degenerate
    with pytest.raises(DivergenceError):
        exact_2d_negative_square_integral(prof)


def test_hexagon_profile():
    S = surface_area_measure(regular_polygon(6))
    prof = cosine_profile_from_atoms(S)
    # three antipodal normal pairs give kinks every pi/3
    assert len(prof) == 6
    theta = np.arange(360) * np.pi / 180
    h = prof(theta)
    np.testing.assert_allclose(h, _direct_h(S.directions, S.weights, theta),
                               atol=1e-14)
    np.testing.assert_allclose(h, prof(theta + np.pi / 3), atol=1e-14)


@given(seeds)
def test_exact_matches_adaptive(seed):
    d, w = random_atoms(np.random.default_rng(seed))
    prof = cosine_profile_from_atoms(SurfaceAreaMeasure(d, w))
    if prof.degenerate:
        return
    exact = exact_2d_negative_square_integral(prof)
    assert exact == pytest.approx(_adaptive(d, w), rel=1e-9)


@given(seeds)
def test_rotation_equivariance(seed):
    g = np.random.default_rng(seed)
    d, w = random_atoms(g)
    t = g.uniform(0, 2 * np.pi)
    R = np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
    a = exact_2d_negative_square_integral(
        cosine_profile_from_atoms(SurfaceAreaMeasure(d, w)))
    b = exact_2d_negative_square_integral(
        cosine_profile_from_atoms(SurfaceAreaMeasure(d @ R.T, w)))
    assert b == pytest.approx(a, rel=1e-10)


def test_cube_order_convergence():
    h = lambda u: np.abs(u).sum(axis=1)
    a = integrate_negative_power(h, 3, build_rule(3, 32))
    b = integrate_negative_power(h, 3, build_rule(3, 64))
    assert abs(a - b) / b < 1e-4
