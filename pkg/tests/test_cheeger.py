import math

import numpy as np
import pytest

from affcap import (DomainError, GridFunction, LinearMap, affine_cheeger,
                    affine_perimeter, affine_rayleigh, boundary_contact, box,
                    disk_mesh, ellipse, minimize_rayleigh, polygon_mesh,
                    rayleigh_exponent, regular_polygon)
from affcap.cheeger import _quotient

FOUR_OVER_PI = 4 / math.pi
FAST = {"starts": 3, "sweeps": 4}


@pytest.fixture(scope="module")
def disk():
    return disk_mesh(0.05)


@pytest.fixture(scope="module")
def disk_result():
    return affine_cheeger(regular_polygon(128), 1.0, seed=0, **FAST)


def test_disk_mesh_area(disk):
    assert disk.areas.sum() == pytest.approx(disk.domain.volume, rel=1e-12)
    assert np.all(disk.areas > 0)
    assert disk.boundary.sum() == len(disk.domain.vertices)


def test_polygon_mesh_non_convex():
    from affcap import polygon
    U = polygon([[0, 0], [3, 0], [3, 2], [2, 2], [2, 1], [1, 1], [1, 2], [0, 2]])
    m = polygon_mesh(U, 0.2)
    assert m.areas.sum() == pytest.approx(5.0, rel=1e-12)


def test_gradient_operator_exact_on_linear(disk):
    f = disk.points @ np.array([2.0, -3.0]) + 1
    g = np.einsum("tij,tj->ti", disk.gradient_operator, f[disk.triangles])
    np.testing.assert_allclose(g, np.tile([2.0, -3.0], (len(g), 1)), atol=1e-9)


def test_rayleigh_exponent():
    assert rayleigh_exponent(1, 1) == 1
    assert rayleigh_exponent(1.2, 1.5) == pytest.approx(1.2 * 1.5 / (1.2 - 0.2 * 1.5))
    with pytest.raises(DomainError):
        rayleigh_exponent(3, 2)


def test_disk_cheeger(disk_result):
    assert disk_result.value == pytest.approx(FOUR_OVER_PI, rel=2e-2)
    assert disk_result.boundary_contact_distance < 1e-3
    assert disk_result.comparison_holds


def test_square_cheeger():
    res = affine_cheeger(box([0, 0], [1, 1]), 1.0, seed=0, **FAST)
    assert res.value <= math.sqrt(2 * math.pi) * (1 + 1e-12)
    assert res.boundary_contact_distance < 0.05
    assert res.comparison_holds


def test_scaled_disk(disk_result):
    res = affine_cheeger(regular_polygon(128, 2.0), 1.0, seed=0, **FAST)
    assert res.value == pytest.approx(disk_result.value / 2, rel=1e-3)


def test_shrunk_witness_is_worse(disk_result):
    O = regular_polygon(128)
    D = disk_result.witness.scaled(0.9, disk_result.witness.centroid)
    assert boundary_contact(D, O) == pytest.approx(0.1, abs=0.01)
    assert _quotient(D, 1.0) == pytest.approx(disk_result.value / 0.9, rel=1e-9)
    assert _quotient(D, 1.0) > disk_result.value


def test_quotient_homogeneity():
    D = ellipse(2.0, 0.5, 256)
    for q in (1.0, 1.5):
        for r in (0.9, 1.1):
            assert _quotient(D.scaled(r), q) == pytest.approx(
                r ** (1 - 2 / q) * _quotient(D, q), rel=1e-12)


def test_cone_function(disk):
    f = GridFunction.from_callable(disk, lambda x: 1 - np.linalg.norm(x, axis=1))
    v = affine_rayleigh(f)
    assert v >= FOUR_OVER_PI
    # level sets are disks; the cone has quotient 6/pi in the continuum
    assert v == pytest.approx(6 / math.pi, rel=1e-2)


def test_plateau_function(disk):
    rho = 0.5
    f = GridFunction.from_callable(
        disk, lambda x: np.clip((rho - np.linalg.norm(x, axis=1)) / 0.05, 0, 1))
    expected = affine_perimeter(regular_polygon(4096, rho)) / (math.pi * rho ** 2)
    assert affine_rayleigh(f) == pytest.approx(expected, rel=0.1)


def test_rayleigh_homogeneous(disk):
    f = GridFunction.from_callable(disk, lambda x: np.cos(np.linalg.norm(x, axis=1)))
    for p, q in ((1, 1), (1.2, 1.5)):
        a = affine_rayleigh(f, p, q)
        b = affine_rayleigh(GridFunction(disk, 2 * f.values), p, q)
        c = affine_rayleigh(GridFunction(disk, -3 * f.values), p, q)
        assert b == pytest.approx(a, rel=1e-12)
        assert c == pytest.approx(a, rel=1e-12)


def test_rayleigh_rejects_boundary_values(disk):
    with pytest.raises(DomainError):
        GridFunction(disk, np.ones(len(disk.points)))


@pytest.mark.parametrize("p, q", [(1.0, 1.0), (1.0, 1.5), (1.2, 1.5)])
def test_set_value_below_rayleigh(disk, p, q):
    O = disk.domain
    h = affine_cheeger(O, q, seed=0, **FAST).value
    rng = np.random.default_rng(int(10 * p + q))
    for _ in range(4):
        c = rng.normal(size=2) * 0.1
        f = GridFunction.from_callable(
            disk, lambda x: np.maximum(0.9 - np.linalg.norm(x - c, axis=1), 0)
            * (1 + 0.2 * np.sin(3 * x[:, 0])))
        assert h <= affine_rayleigh(f, p, q) + 1e-9


def test_minimize_rayleigh_disk(disk, disk_result):
    res = minimize_rayleigh(disk, 1, 1, iterations=50)
    assert res.value == pytest.approx(FOUR_OVER_PI, rel=5e-2)
    assert res.value >= disk_result.value - 1e-6
    assert res.trace[0][1] >= res.value


def test_minimize_rayleigh_square():
    S = box([0, 0], [1, 1])
    res = minimize_rayleigh(polygon_mesh(S, 0.1), 1, 1, iterations=30)
    assert res.value >= affine_cheeger(S, 1.0, seed=0, **FAST).value - 1e-6


def test_refinement_non_increasing():
    vals = [minimize_rayleigh(disk_mesh(h), 1, 1, iterations=30).value
            for h in (0.2, 0.1, 0.05)]
    assert vals[0] >= vals[1] >= vals[2]


def test_shear_invariance(disk, disk_result):
    T = LinearMap([[1.0, 0.8], [0.0, 1.0]])
    sheared = disk.mapped(T)
    a = affine_cheeger(sheared.domain, 1.0, seed=0, **FAST).value
    assert a == pytest.approx(disk_result.value, rel=2e-2)
    r0 = minimize_rayleigh(disk, 1, 1, iterations=20).value
    r1 = minimize_rayleigh(sheared, 1, 1, iterations=20).value
    assert r1 == pytest.approx(r0, rel=2e-2)


def test_result_serializes(disk_result):
    import json
    d = json.loads(disk_result.to_json())
    assert d["q"] == 1.0
    assert d["witness"]["dimension"] == 2
