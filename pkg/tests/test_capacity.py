import math

import numpy as np
import pytest
from hypothesis import given

from affcap import (CandidateFamily, ConfigError, ConvexityError,
                    DiscreteMeasure, DomainError, LinearMap, affine_perimeter,
                    apply_map, box, capacity_bracket, capacity_convex,
                    convex_hull, cross_counterexample, ellipse, from_rings,
                    icosphere, isocapacitary_constant, polygon, property_suite,
                    random_special_linear, regular_polygon, segment,
                    shadow_lower_bound, trace_constants)
from affcap.corpus import random_star_polygon

from conftest import convex_polygons, seeds

SQRT_2PI = math.sqrt(2 * math.pi)
DIAMOND = np.array([[1, 0], [0, 1], [-1, 0], [0, -1]], float)


def _two_diamonds():
    return from_rings([DIAMOND, DIAMOND + [3, 0]])


def test_capacity_convex_examples():
    assert capacity_convex(regular_polygon(10_000)) == pytest.approx(4.0, rel=1e-6)
    assert capacity_convex(icosphere(4)) == pytest.approx(2 * math.pi, rel=3e-3)
    assert capacity_convex(box([-500, -5], [500, 5])) == pytest.approx(
        100 * SQRT_2PI, rel=1e-12)


def test_capacity_convex_errors():
    with pytest.raises(ConvexityError):
        capacity_convex(polygon([[0, 0], [2, 0], [2, 2], [1, 1], [0, 2]]))
    with pytest.raises(DomainError):
        capacity_convex(segment([0, 0], [1, 0]))


def test_bracket_collapses_on_convex():
    K = regular_polygon(9)
    b = capacity_bracket(K)
    assert b.exact
    assert b.lower == b.upper == pytest.approx(capacity_convex(K), rel=1e-15)


def test_bracket_two_diamonds():
    U = _two_diamonds()
    b = capacity_bracket(U)
    p_diamond = affine_perimeter(polygon(DIAMOND))
    assert p_diamond == pytest.approx(SQRT_2PI * math.sqrt(2))
    assert b.lower >= p_diamond
    assert b.upper <= affine_perimeter(convex_hull(U.vertices)) * (1 + 1e-9)
    assert b.lower <= b.upper


def test_shadow_bound_is_hull_perimeter_for_connected_sets(rng):
    P = random_star_polygon(rng)
    bound, _ = shadow_lower_bound(P)
    assert bound == pytest.approx(affine_perimeter(convex_hull(P.vertices)),
                                  rel=1e-10)


def test_segment_bracket():
    S = segment([-1, 0], [1, 0])
    b = capacity_bracket(S)
    assert b.lower == 0.0
    thin = [b.candidates[f"thin({w:g})"] for w in (1e-1, 1e-2, 1e-3, 1e-4)]
    assert all(a > c for a, c in zip(thin, thin[1:]))
    # square caps: the (2 + w) x w rectangle has perimeter sqrt(2 pi (2 + w) w)
    w = 1e-4
    assert thin[-1] == pytest.approx(math.sqrt(2 * math.pi * (2 + w) * w), rel=1e-9)


def test_family_validation():
    with pytest.raises(ConfigError):
        CandidateFamily(upper=("nope",))
    with pytest.raises(ConfigError):
        CandidateFamily(upper=())


def test_family_monotone():
    U = _two_diamonds()
    small = capacity_bracket(U, CandidateFamily(upper=("hull",), lower=("inscribed",)))
    big = capacity_bracket(U, CandidateFamily(upper=("hull", "offset", "thin"),
                                              lower=("inscribed", "shadow")))
    assert big.upper <= small.upper
    assert big.lower >= small.lower


def test_property_suite_square():
    res = property_suite(box([0, 0], [1, 1]), seed=0)
    assert res["passed"], res["checks"]
    assert capacity_convex(box([0, 0], [2, 2])) == pytest.approx(2 * SQRT_2PI)
    sheared = apply_map(box([0, 0], [1, 1]), LinearMap([[1, 5], [0, 1]]))
    assert capacity_convex(sheared) == pytest.approx(SQRT_2PI, rel=1e-8)
    seq = [capacity_convex(box([0, 0], [1, 1]).scaled(1 + 1 / j)) for j in
           (1, 2, 4, 8, 1 << 20)]
    assert all(a > b for a, b in zip(seq, seq[1:]))
    assert seq[-1] == pytest.approx(SQRT_2PI, rel=1e-5)


def test_property_suite_non_convex():
    fam = CandidateFamily(upper=("hull", "components"), lower=("shadow",))
    res = property_suite(_two_diamonds(), seed=1, family=fam)
    assert res["passed"], res["checks"]


def test_cross():
    fam = CandidateFamily(upper=("hull",), lower=("shadow", "dominated"))
    res = cross_counterexample(fam)
    assert res["C_E"] == pytest.approx(100 * SQRT_2PI, rel=1e-9)
    assert res["C_F"] == pytest.approx(100 * SQRT_2PI, rel=1e-9)
    assert res["P_diamond"] == pytest.approx(1000 * math.sqrt(math.pi), rel=1e-12)
    assert res["superadditive"]
    assert res["lower"] >= 1000
    assert res["status"] == "superadditive"


def test_cross_inconclusive_is_not_a_violation():
    fam = CandidateFamily(upper=("hull",), lower=("inscribed",))
    res = cross_counterexample(fam)
    assert res["lower"] <= res["upper"]
    if not res["superadditive"]:
        assert res["status"] == "inconclusive at this effort"


def test_trace_point_mass():
    mu = DiscreteMeasure([[0.0, 0.0]], [1.0])
    tc = trace_constants(mu, 1.0, [ellipse(r, r, 4096) for r in (1, 2, 4)])
    assert tc.kappa2_hat == pytest.approx(0.25, rel=1e-6)
    assert tc.kappa3_hat <= tc.kappa2_hat + 1e-12
    assert tc.feasibility_slack == pytest.approx(tc.kappa3_hat)


def test_trace_zero_measure():
    tc = trace_constants(DiscreteMeasure.zero(2), 1.0, [box([0, 0], [1, 1])])
    assert (tc.kappa2_hat, tc.kappa3_hat, tc.feasibility_slack) == (0, 0, 0)


def test_trace_lebesgue_grid():
    k = 40
    g = (np.arange(k) + 0.5) / k
    pts = np.array([[x, y] for x in g for y in g])
    mu = DiscreteMeasure(pts, np.full(len(pts), 1 / k ** 2))
    family = [ellipse(r, r, 1024, center=(0.5, 0.5)) for r in (0.1, 0.25, 0.5)]
    family.append(box([0, 0], [1, 1]))
    tc = trace_constants(mu, 2.0, family)
    c = isocapacitary_constant(2)
    assert c == pytest.approx(math.sqrt(math.pi) / 4)
    assert tc.kappa2_hat <= c + 0.02
    assert tc.kappa3_hat <= tc.kappa2_hat + 1e-12


def test_trace_domain():
    mu = DiscreteMeasure([[0.0, 0.0]], [1.0])
    with pytest.raises(DomainError):
        trace_constants(mu, 2.5, [box([0, 0], [1, 1])])
    with pytest.raises(DomainError):
        trace_constants(mu, 1.0, [])
    with pytest.raises(DomainError):
        DiscreteMeasure([[0.0, 0.0]], [-1.0])


@given(convex_polygons())
def test_bracket_exact_on_convex(P):
    b = capacity_bracket(P)
    assert abs(b.upper - b.lower) <= 1e-9 * b.upper


@given(convex_polygons())
def test_scaling_law(P):
    c = capacity_convex(P)
    for r in (0.5, 2.0, 3.0):
        assert capacity_convex(P.scaled(r)) / c == pytest.approx(r, rel=1e-10)


@given(convex_polygons(), seeds)
def test_sl_invariance(P, seed):
    g = np.random.default_rng(seed)
    T = LinearMap(random_special_linear(2, g, 100.0), g.normal(size=2))
    assert capacity_convex(apply_map(P, T)) == pytest.approx(
        capacity_convex(P), rel=1e-8)


@given(seeds)
def test_sandwich_star(seed):
    P = random_star_polygon(np.random.default_rng(seed))
    fam = CandidateFamily(upper=("hull", "components"), lower=("shadow", "inscribed"))
    b = capacity_bracket(P, fam)
    assert b.lower <= b.upper * (1 + 1e-12)


def test_random_special_linear_condition(rng):
    for _ in range(50):
        A = random_special_linear(2, rng, 100.0)
        assert np.linalg.det(A) == pytest.approx(1.0)
        assert np.linalg.cond(A) <= 100.0 * (1 + 1e-9)
