import math

import numpy as np
import pytest
from hypothesis import given

from affcap import (InvalidPolytopeError, LinearMap, Polytope, apply_map, box,
                    classical_perimeter, convex_hull, from_rings,
                    load_polytope, omega, polygon, regular_polygon,
                    save_polytope, segment, support, surface_area_measure,
                    volume)
from affcap.errors import DegeneracyError

from conftest import convex_polygons, seeds, star_polygons


@pytest.mark.parametrize("k, expected", [(1, 2.0), (2, math.pi),
                                         (3, 4 * math.pi / 3)])
def test_omega(k, expected):
    assert omega(k) == pytest.approx(expected, rel=1e-15)


def test_omega_domain():
    with pytest.raises(ValueError):
        omega(0)


def test_hull_square_and_cube():
    P = convex_hull([[0, 0], [1, 0], [1, 1], [0, 1]])
    assert len(P.facets) == 4
    np.testing.assert_allclose(P.measures, 1.0)
    C = convex_hull([[i, j, k] for i in (0, 1) for j in (0, 1) for k in (0, 1)])
    assert len(C.facets) == 6
    np.testing.assert_allclose(C.measures, 1.0)


def test_hull_drops_interior_point():
    P = convex_hull([[0, 0], [1, 0], [1, 1], [0, 1], [0.4, 0.6]])
    assert len(P.facets) == 4
    assert len(P.vertices) == 4


def test_hull_degenerate_raises():
    with pytest.raises(DegeneracyError):
        convex_hull([[0, 0], [1, 1], [2, 2]])


def test_surface_measure_square_cube():
    S = surface_area_measure(box([0, 0], [1, 1]))
    got = sorted(zip(map(tuple, np.round(S.directions, 12)), S.weights))
    assert got == sorted([((1.0, 0.0), 1.0), ((-1.0, 0.0), 1.0),
                          ((0.0, 1.0), 1.0), ((0.0, -1.0), 1.0)])
    S3 = surface_area_measure(box([0, 0, 0], [1, 1, 1]))
    assert len(S3) == 6
    np.testing.assert_allclose(S3.weights, 1.0)


def test_surface_measure_dilation():
    S = surface_area_measure(box([0, 0], [1, 1]).scaled(3))
    np.testing.assert_allclose(S.weights, 3.0)


def test_volume_examples(rng):
    assert volume(box([0, 0, 0], [1, 1, 1])) == pytest.approx(1.0)
    diamond = polygon([[1, 0], [0, 1], [-1, 0], [0, -1]])
    assert diamond.volume == pytest.approx(2.0)
    for _ in range(5):
        p = rng.normal(size=(4, 3))
        expected = abs(np.linalg.det(p[1:] - p[0])) / 6
        assert convex_hull(p).volume == pytest.approx(expected, rel=1e-12)


def test_support_examples():
    P = box([-1, -1], [1, 1])
    assert support(P, [1, 0]) == 1.0
    assert support(P, [1, 1]) == 2.0
    assert support(P, [0, 0]) == 0.0


def test_apply_map_examples():
    P = box([0, 0], [1, 1])
    Q = apply_map(P, LinearMap(np.eye(2)))
    np.testing.assert_allclose(Q.vertices, P.vertices)
    R = apply_map(P, LinearMap(np.diag([2.0, 0.5])))
    assert R.volume == pytest.approx(1.0)
    np.testing.assert_allclose(R.vertices.max(axis=0), [2.0, 0.5])
    C = box([0, 0, 0], [1, 1, 1])
    D = C.translated([5, 5, 5])
    np.testing.assert_allclose(D.normals, C.normals)
    np.testing.assert_allclose(D.measures, C.measures)


def test_apply_map_orientation_reversal():
    P = box([0, 0], [2, 1])
    Q = apply_map(P, LinearMap([[0, 1], [1, 0]]))
    assert Q.volume == pytest.approx(2.0)
    np.testing.assert_allclose(np.sum(Q.measures[:, None] * Q.normals, axis=0),
                               0, atol=1e-12)


def test_classical_perimeter_examples():
    assert classical_perimeter(surface_area_measure(box([0, 0], [1, 1]))) == 4.0
    assert classical_perimeter(
        surface_area_measure(box([0, 0, 0], [1, 1, 1]))) == pytest.approx(6.0)
    for r in (1.0, 2.5):
        P = regular_polygon(10_000, r)
        assert classical_perimeter(surface_area_measure(P)) == pytest.approx(
            2 * math.pi * r, rel=1e-6)


def test_segment_has_zero_volume():
    S = segment([-1, 0], [1, 0])
    assert S.volume == 0.0
    np.testing.assert_allclose(S.measures, 2.0)


def test_non_convex_rings(rng):
    U = polygon([[0, 0], [3, 0], [3, 2], [2, 2], [2, 1], [1, 1], [1, 2], [0, 2]])
    assert not U.is_convex
    assert U.volume == pytest.approx(5.0)
    holed = from_rings([np.array([[0, 0], [4, 0], [4, 4], [0, 4]], float),
                        np.array([[1, 1], [1, 3], [3, 3], [3, 1]], float)])
    assert holed.volume == pytest.approx(12.0)
    assert len(holed.rings()) == 2


def test_invalid_facets_rejected():
    with pytest.raises(InvalidPolytopeError):
        Polytope.from_dict({"vertices": [[0, 0], [1, 0], [0, 1]],
                            "facets": [{"normal": [0, -1], "measure": 1,
                                        "offset": 0}]})
    with pytest.raises(InvalidPolytopeError):
        Polytope.from_dict({"vertices": [[0, 0], [1, 0]],
                            "facets": [{"normal": [0, 1]}]})
    with pytest.raises(InvalidPolytopeError):
        Polytope.from_dict({"points": []})


def test_json_round_trip(tmp_path):
    for P in (regular_polygon(7), box([0, 0, 0], [1, 2, 3]),
              polygon([[0, 0], [2, 0], [2, 2], [1, 1], [0, 2]])):
        path = tmp_path / "p.json"
        save_polytope(P, path)
        Q = load_polytope(path)
        save_polytope(Q, path)
        R = load_polytope(path)
        np.testing.assert_allclose(R.vertices, P.vertices, atol=1e-12, rtol=0)
        np.testing.assert_allclose(R.measures, P.measures, rtol=1e-12)


def test_ring_only_json():
    P = Polytope.from_dict({"dimension": 2,
                            "vertices": [[0, 0], [2, 0], [2, 2], [1, 1], [0, 2]],
                            "rings": [[0, 1, 2, 3, 4]]})
    assert P.volume == pytest.approx(3.0)


@given(convex_polygons())
def test_closing_up_convex(P):
    s = np.sum(P.measures[:, None] * P.normals, axis=0)
    assert np.linalg.norm(s) <= 1e-9 * P.measures.sum()


@given(star_polygons())
def test_closing_up_star(P):
    s = np.sum(P.measures[:, None] * P.normals, axis=0)
    assert np.linalg.norm(s) <= 1e-9 * P.measures.sum()


@given(seeds)
def test_closing_up_polyhedra(seed):
    from affcap.corpus import random_convex_polytope
    P = random_convex_polytope(np.random.default_rng(seed))
    s = np.sum(P.measures[:, None] * P.normals, axis=0)
    assert np.linalg.norm(s) <= 1e-9 * P.measures.sum()


@given(convex_polygons())
def test_homogeneity(P):
    for r in (0.5, 2.0, 10.0):
        Q = P.scaled(r)
        assert Q.volume == pytest.approx(r ** 2 * P.volume, rel=1e-10)
        np.testing.assert_allclose(Q.measures, r * P.measures, rtol=1e-10)


@given(convex_polygons(), seeds)
def test_support_subadditive(P, seed):
    g = np.random.default_rng(seed)
    u, v = g.normal(size=(2, 100, 2))
    lhs = support(P, u + v)
    rhs = support(P, u) + support(P, v)
    assert np.all(lhs <= rhs + 1e-12 * (1 + np.abs(rhs)))


@given(convex_polygons(), seeds)
def test_apply_map_composition(P, seed):
    g = np.random.default_rng(seed)
    T1 = LinearMap(g.normal(size=(2, 2)) + 2 * np.eye(2), g.normal(size=2))
    T2 = LinearMap(g.normal(size=(2, 2)) + 2 * np.eye(2), g.normal(size=2))
    if min(abs(T1.determinant), abs(T2.determinant)) < 1e-3:
        return
    A = apply_map(apply_map(P, T1), T2)
    B = apply_map(P, T2.compose(T1))
    np.testing.assert_allclose(A.vertices, B.vertices, atol=1e-10)
