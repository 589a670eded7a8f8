"""Affine BV-capacity of compact polyhedral sets.

For a convex body the capacity equals the affine perimeter.  For a general
compact set it is the infimum of the affine perimeter over bounded open
supersets, so every explicit superset gives an upper bound.  Lower bounds
come from two sources:

* monotonicity: any convex subset ``D`` of ``K`` has ``C(K) >= P(D)``;
* shadows: every open ``L`` containing ``K`` has
  ``h_{Pi L}(u) >= |K | u^perp|`` (a line parallel to ``u`` that meets
  ``L`` crosses its boundary at least twice), so inserting the shadow
  length ``s(u)`` of ``K`` into the polar volume integral bounds
  ``P(L)`` from below uniformly in ``L``.

In the plane ``s(theta)`` is a sum of terms ``c . u^perp(theta)`` whose
combinatorics only change where two vertices project to the same point, so
the shadow bound is evaluated in closed form with the arc integrator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import shapely
import shapely.affinity
from shapely.geometry import Polygon, box as shapely_box

from . import _format
from ._planar import component_points, from_shapely, polygons, to_shapely
from .errors import ConfigError, ConvexityError, DomainError
from .functionals import affine_perimeter
from .geometry import (LinearMap, Polytope, apply_map, box, convex_hull,
                       from_rings, omega, polygon, random_rotation)
from .sphere import PiecewiseCosineProfile, exact_2d_negative_square_integral
from .tolerance import DEFAULT_TOL

__all__ = ["capacity_convex", "CandidateFamily", "CapacityBracket",
           "capacity_bracket", "shadow_lower_bound", "property_suite",
           "cross_counterexample", "DiscreteMeasure", "TraceConstants",
           "trace_constants", "random_special_linear", "cross_polygon",
           "isocapacitary_constant", "UPPER_KINDS", "LOWER_KINDS"]

UPPER_KINDS = ("hull", "offset", "components", "thin", "grid", "search")
LOWER_KINDS = ("shadow", "dominated", "inscribed")


def capacity_convex(K, *, order=None, method="auto"):
    """Capacity of a convex body, equal to its affine perimeter."""
    if not K.is_convex:
        raise ConvexityError("capacity_convex needs a convex body; "
                             "use capacity_bracket for general compacta")
    if not K.volume > 0:
        raise DomainError("convex body must have positive volume")
    kw = {} if order is None else {"order": order}
    return affine_perimeter(K, method=method, **kw)


@dataclass(frozen=True)
class CandidateFamily:
    """Search configuration for :func:`capacity_bracket`.

    Attributes
    ----------
    upper : tuple of str
        Superset families, any of ``hull``, ``offset``, ``components``,
        ``thin``, ``grid``, ``search``.
    lower : tuple of str
        Subset families, any of ``shadow``, ``dominated``, ``inscribed``.
    dilations : tuple of int
        Exponents k of the hull dilation factors ``1 + 10^-k``.
    offsets : tuple of float
        Offset radii relative to the diameter of ``K``.
    widths : tuple of float
        Absolute widths of the thin rectangles around flat sets.
    grid : tuple of int
        Grid resolutions, cells of side ``diam / g``.
    search_sweeps : int
        Coordinate-descent sweeps per local search start.
    search_max_vertices : int
        Starts with more vertices than this are not searched.
    max_shadow_vertices : int
        Skip the shadow bound when the components have more hull vertices.
    seed : int
    """

    upper: tuple = UPPER_KINDS
    lower: tuple = LOWER_KINDS
    dilations: tuple = (3, 6, 9, 12)
    offsets: tuple = (1e-1, 1e-2, 1e-3)
    widths: tuple = (1e-1, 1e-2, 1e-3, 1e-4)
    grid: tuple = (8, 16, 32)
    search_sweeps: int = 12
    search_max_vertices: int = 64
    max_shadow_vertices: int = 400
    seed: int = 0

    def __post_init__(self):
        bad = [k for k in self.upper if k not in UPPER_KINDS]
        bad += [k for k in self.lower if k not in LOWER_KINDS]
        if bad:
            raise ConfigError(f"unknown candidate families: {bad}")
        if not self.upper:
            raise ConfigError("empty superset family")


@dataclass(frozen=True, eq=False)
class CapacityBracket:
    """Certified ``lower <= C(K) <= upper`` with the sets that realise them."""

    lower: float
    upper: float
    lower_witness: Polytope | None
    upper_witness: Polytope | None
    exact: bool
    lower_method: str = ""
    upper_method: str = ""
    candidates: dict = field(default_factory=dict)

    @property
    def width(self):
        return self.upper - self.lower

    def to_dict(self):
        return {
            "lower": self.lower,
            "upper": self.upper,
            "exact": self.exact,
            "lower_method": self.lower_method,
            "upper_method": self.upper_method,
            "candidates": self.candidates,
            "lower_witness": None if self.lower_witness is None
            else self.lower_witness.to_dict(),
            "upper_witness": None if self.upper_witness is None
            else self.upper_witness.to_dict(),
        }

    def to_json(self):
        return _format.dumps(self.to_dict())


# shadow lower bound ---------------------------------------------------------

def _shadow_vector(comps, theta):
    """Vector c with shadow length ``c . u_perp(theta)`` near ``theta``.

    Each merged group of projected component intervals contributes the
    difference between the vertex attaining its maximum and the one
    attaining its minimum.
    """
    w = np.array([-math.sin(theta), math.cos(theta)])
    lo_pts, hi_pts, lo, hi = [], [], [], []
    for pts in comps:
        p = pts @ w
        i, j = int(np.argmin(p)), int(np.argmax(p))
        lo_pts.append(pts[i])
        hi_pts.append(pts[j])
        lo.append(p[i])
        hi.append(p[j])
    lo, hi = np.array(lo), np.array(hi)
    order = np.argsort(lo, kind="stable")
    c = np.zeros(2)
    start, reach, reach_pt = order[0], hi[order[0]], hi_pts[order[0]]
    for k in order[1:]:
        if lo[k] > reach:
            c += reach_pt - lo_pts[start]
            start, reach, reach_pt = k, hi[k], hi_pts[k]
        elif hi[k] > reach:
            reach, reach_pt = hi[k], hi_pts[k]
    return c + reach_pt - lo_pts[start]


def _shadow_profile(comps, tol=DEFAULT_TOL):
    """Shadow length of a union of components as a piecewise cosine profile."""
    pts = np.vstack(comps)
    d = pts[:, None, :] - pts[None, :, :]
    i, j = np.triu_indices(len(pts), 1)
    d = d[i, j]
    d = d[np.linalg.norm(d, axis=1) > 0]
    # the projection order flips where u is parallel to a difference
    ang = np.mod(np.arctan2(d[:, 1], d[:, 0]), np.pi)
    ang = np.unique(np.concatenate([ang, ang + np.pi, [0.0]]))
    keep = np.concatenate([[True], np.diff(ang) > tol.angle])
    start = ang[keep]
    end = np.concatenate([start[1:], [start[0] + 2 * np.pi]])
    amp, phase = [], []
    for a, b in zip(start, end):
        c = _shadow_vector(comps, 0.5 * (a + b))
        # c . (-sin t, cos t) = R cos(t - phi)
        amp.append(math.hypot(c[0], c[1]))
        phase.append(math.atan2(-c[0], c[1]))
    return PiecewiseCosineProfile(start, end, np.array(amp), np.array(phase))


def _hull_points(pts):
    if len(pts) < 3:
        return pts
    try:
        return convex_hull(pts).vertices
    except ValueError:
        # collinear: keep the two extreme points
        c = pts - pts.mean(axis=0)
        axis = np.linalg.svd(c)[2][0]
        p = c @ axis
        return pts[[int(np.argmin(p)), int(np.argmax(p))]]


def shadow_lower_bound(K, *, max_vertices=400):
    """``C(K) >= (8 pi / int s^-2)^(1/2)`` with ``s`` the planar shadow length.

    Returns ``(bound, profile)``; the bound is 0 when ``s`` vanishes in some
    direction (flat sets) and ``None`` when the components together have
    more than ``max_vertices`` hull vertices.
    """
    comps = [_hull_points(p) for p in component_points(to_shapely(K))]
    if sum(len(c) for c in comps) > max_vertices:
        return None, None
    profile = _shadow_profile(comps)
    if profile.degenerate:
        return 0.0, profile
    integral = exact_2d_negative_square_integral(profile)
    return math.sqrt(8 * math.pi / integral), profile


def _width_profile_min_ratio(profile, D):
    """Largest ``lam`` with ``lam * width_D <= s`` on the whole circle.

    On an arc where both are single cosines the ratio is monotone, so the
    minimum over the circle is attained at a breakpoint of either profile.
    """
    nu = D.normals
    ang = np.mod(np.arctan2(nu[:, 1], nu[:, 0]), 2 * np.pi)
    t = np.concatenate([profile.start, ang, np.mod(ang + np.pi, 2 * np.pi)])
    u_perp = np.column_stack([-np.sin(t), np.cos(t)])
    proj = D.vertices @ u_perp.T
    width = proj.max(axis=0) - proj.min(axis=0)
    s = profile(t)
    return float(np.min(s / width))


# candidate supersets ---------------------------------------------------------

def _perimeter(geom_or_poly):
    P = geom_or_poly if isinstance(geom_or_poly, Polytope) \
        else from_shapely(geom_or_poly)
    return affine_perimeter(P), P


def _dilate(geom, factor):
    c = geom.centroid
    return shapely.affinity.scale(geom, factor, factor, origin=c)


def _valid_superset(cand, target):
    return (cand.is_valid and not cand.is_empty
            and shapely.contains_properly(cand, target))


def _upper_candidates(K, geom, fam, rng):
    """Yield ``(name, shapely polygon)`` supersets of ``geom``."""
    diam = max(K.diameter, 1e-300)
    hull = geom.convex_hull
    if "hull" in fam.upper and hull.area > 0:
        for k in fam.dilations:
            yield f"hull*(1+1e-{k})", _dilate(hull, 1 + 10.0 ** -k)
    if "offset" in fam.upper:
        for eps in fam.offsets:
            yield f"offset({eps:g})", geom.buffer(eps * diam, quad_segs=8)
            yield f"hull_offset({eps:g})", hull.buffer(eps * diam, quad_segs=8)
    if "components" in fam.upper:
        parts = [p.convex_hull for p in polygons(geom)] or []
        if len(parts) > 1:
            u = shapely.union_all([_dilate(p, 1 + 1e-9) for p in parts])
            yield "component_hulls", u
    if "thin" in fam.upper:
        for wdt in fam.widths:
            yield f"thin({wdt:g})", geom.buffer(0.5 * wdt, cap_style="square",
                                                join_style="mitre")
    if "grid" in fam.upper:
        x0, y0, _, _ = geom.bounds
        for g in fam.grid:
            side = diam / g
            ox, oy = rng.uniform(0, side, 2)
            minx, miny = x0 - side + ox, y0 - side + oy
            nx = int(math.ceil((geom.bounds[2] - minx) / side)) + 1
            ny = int(math.ceil((geom.bounds[3] - miny) / side)) + 1
            cells = [shapely_box(minx + a * side, miny + b * side,
                                 minx + (a + 1) * side, miny + (b + 1) * side)
                     for a in range(nx) for b in range(ny)]
            tree = shapely.STRtree(cells)
            hit = tree.query(geom.buffer(1e-9 * diam), predicate="intersects")
            cover = shapely.union_all([cells[h] for h in hit])
            yield f"grid({g})", cover.buffer(1e-9 * diam, join_style="mitre")


def _local_search(poly, target, value, sweeps, diam, rng):
    """Coordinate descent on the vertices of a simple polygon superset.

    A move is kept when the polygon stays simple, still contains the target
    in its interior and has smaller affine perimeter.
    """
    pts = np.asarray(poly.exterior.coords)[:-1].copy()
    step = 0.05 * diam
    moves = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], float)
    for _ in range(sweeps):
        improved = False
        for i in rng.permutation(len(pts)):
            for mv in moves:
                trial = pts.copy()
                trial[i] = trial[i] + step * mv
                cand = Polygon(trial)
                if not _valid_superset(cand, target):
                    continue
                v = affine_perimeter(from_shapely(cand))
                if v < value:
                    pts, value, improved = trial, v, True
                    break
        if not improved:
            step *= 0.5
            if step < 1e-7 * diam:
                break
    return value, Polygon(pts)


def _inscribed_candidates(geom):
    """Convex subsets: convex components and greedy merges of triangles."""
    out = []
    for poly in polygons(geom):
        if abs(poly.convex_hull.area - poly.area) <= 1e-12 * max(poly.area, 1):
            out.append(("convex_component", poly))
            continue
        tris = polygons(shapely.constrained_delaunay_triangles(poly))
        tris.sort(key=lambda t: -t.area)
        for seed_tri in tris[:8]:
            cur = seed_tri
            grown = True
            while grown:
                grown = False
                for t in tris:
                    if cur.covers(t.representative_point()):
                        continue
                    m = shapely.union_all([cur, t])
                    if isinstance(m, Polygon) and \
                            abs(m.convex_hull.area - m.area) <= 1e-12 * m.area:
                        cur, grown = m, True
            out.append(("convex_piece", cur))
    return out


def capacity_bracket(K, family=None, *, seed=None):
    """Certified bracket for the affine BV-capacity of a compact set.

    Convex bodies collapse the bracket to the affine perimeter.  Planar
    sets use the candidate families in ``family``.  For non-convex sets in
    higher dimension only the hull bound and the trivial lower bound 0 are
    available.
    """
    family = CandidateFamily() if family is None else family
    if seed is not None:
        family = CandidateFamily(**{**family.__dict__, "seed": seed})
    if K.is_convex and K.volume > 0:
        c = capacity_convex(K)
        return CapacityBracket(c, c, K, K, True, "convex", "convex")
    if K.dimension != 2:
        H = convex_hull(K.vertices)
        c = affine_perimeter(H)
        return CapacityBracket(0.0, c, None, H, False, "trivial", "hull")
    return _bracket_2d(K, family)


def _bracket_2d(K, fam):
    rng = np.random.default_rng(fam.seed)
    geom = to_shapely(K)
    target = geom
    diam = K.diameter
    values = {}
    best_up = (math.inf, None, "")
    starts = []
    for name, cand in _upper_candidates(K, geom, fam, rng):
        if not _valid_superset(cand, target):
            continue
        v, P = _perimeter(cand)
        values[name] = v
        if v < best_up[0]:
            best_up = (v, P, name)
        for poly in polygons(cand):
            if len(polygons(cand)) == 1 and not poly.interiors \
                    and len(poly.exterior.coords) - 1 <= fam.search_max_vertices:
                starts.append((name, poly, v))
    if "search" in fam.upper:
        for name, poly, v in starts:
            sv, spoly = _local_search(poly, target, v, fam.search_sweeps,
                                      diam, rng)
            values[f"search[{name}]"] = sv
            if sv < best_up[0]:
                best_up = (sv, from_shapely(spoly), f"search[{name}]")
    if best_up[1] is None:
        raise ConfigError("no candidate superset contains the set")

    lower, lower_method = 0.0, "trivial"
    witness, witness_value = None, -1.0
    profile = None
    if "shadow" in fam.lower:
        v, profile = shadow_lower_bound(K, max_vertices=fam.max_shadow_vertices)
        if v is not None:
            values["lower:shadow"] = v
            if v > lower:
                lower, lower_method = v, "shadow"
    subsets = []
    if "dominated" in fam.lower and profile is not None \
            and not profile.degenerate:
        for name, D in _dominated_candidates(geom):
            lam = _width_profile_min_ratio(profile, D)
            subsets.append((f"dominated[{name}]", lam * affine_perimeter(D),
                            D.scaled(lam, D.centroid)))
    if "inscribed" in fam.lower:
        for name, poly in _inscribed_candidates(geom):
            if poly.area > 0:
                D = from_shapely(poly)
                subsets.append((name, affine_perimeter(D), D))
    for name, v, D in subsets:
        values[f"lower:{name}"] = max(values.get(f"lower:{name}", 0.0), v)
        if v > lower:
            lower, lower_method = v, name
        if v > witness_value:
            witness, witness_value = D, v
    upper = best_up[0]
    return CapacityBracket(lower, upper, witness, best_up[1],
                           bool(upper - lower <= 1e-9 * max(upper, 1e-300)),
                           lower_method, best_up[2], values)


def _dominated_candidates(geom):
    """Convex test bodies whose scaled copies must fit under the shadow."""
    hull = geom.convex_hull
    out = []
    if hull.area > 0:
        out.append(("hull", from_shapely(hull)))
        pts = np.asarray(hull.exterior.coords)[:-1]
        c = np.asarray(hull.centroid.coords)[0]
        # diamond through the axis-extreme points, centred on the hull
        r = np.abs(pts - c)
        ax, ay = r[:, 0].max(), r[:, 1].max()
        diamond = c + np.array([[ax, 0], [0, ay], [-ax, 0], [0, -ay]])
        out.append(("diamond", from_rings([diamond])))
    return out


# property suite ---------------------------------------------------------------

def random_special_linear(n, rng, max_condition=100.0):
    """Random matrix of determinant one and condition number at most given."""
    s = np.exp(rng.uniform(0, math.log(max_condition), n))
    s /= np.exp(np.mean(np.log(s)))
    A = random_rotation(n, rng) @ np.diag(s) @ random_rotation(n, rng)
    return A / abs(np.linalg.det(A)) ** (1.0 / n)


def _check(name, value, passed, **extra):
    return {"check": name, "value": value, "passed": bool(passed), **extra}


def property_suite(K, seed=0, *, family=None):
    """Numerical checks of the structural properties of the capacity.

    Convex ``K`` uses exact values.  Non-convex planar ``K`` compares
    brackets: a property passes when the transformed bracket and the
    predicted bracket overlap.
    """
    rng = np.random.default_rng(seed)
    n = K.dimension
    convex = K.is_convex and K.volume > 0

    def cap(S):
        if convex:
            c = capacity_convex(S)
            return c, c
        b = capacity_bracket(S, family)
        return b.lower, b.upper

    lo, up = cap(K)
    base = up
    checks = [_check("boundary", base, True,
                     note="set and boundary share the same facets")]
    tol = 1e-9 if n == 2 else 5e-3
    for r in (0.5, 2.0, 3.0):
        l2, u2 = cap(K.scaled(r, K.centroid))
        f = r ** (n - 1)
        err = max(abs(u2 - f * up), abs(l2 - f * lo)) / max(f * up, 1e-300)
        ok = err <= tol if convex else (l2 <= f * up * (1 + 1e-9)
                                        and f * lo <= u2 * (1 + 1e-9))
        checks.append(_check(f"scaling r={r:g}", err, ok))
    worst = 0.0
    ok_all = True
    for _ in range(20):
        T = LinearMap(random_special_linear(n, rng), rng.normal(size=n) * 10)
        l2, u2 = cap(apply_map(K, T))
        err = max(abs(u2 - up), abs(l2 - lo)) / max(up, 1e-300)
        worst = max(worst, err)
        if not convex:
            ok_all &= l2 <= up * (1 + 1e-8) and lo <= u2 * (1 + 1e-8)
    sl_tol = 1e-8 if n == 2 else 5e-3
    checks.append(_check("special linear invariance", worst,
                         worst <= sl_tol if convex else ok_all))
    l2, u2 = cap(K.scaled(1.01, K.centroid))
    checks.append(_check("monotone", u2 - lo, lo <= u2 * (1 + 1e-12)))
    j = int(math.ceil(1.0 / ((1 + 1e-6) ** (1.0 / (n - 1)) - 1))) + 1
    seq = [cap(K.scaled(1 + 1.0 / jj, K.centroid))[1] for jj in (1, 2, 4, 8, j)]
    dec = all(a >= b * (1 - 1e-12) for a, b in zip(seq, seq[1:]))
    gap = (seq[-1] - up) / up
    checks.append(_check("decreasing limit", gap, dec and gap <= 1e-6, j=j))
    outer = []
    for eps in (1e-1, 1e-2, 1e-3):
        delta = eps / (2 * (n - 1))
        v = capacity_convex(convex_hull(K.scaled(1 + delta, K.centroid).vertices)) \
            if convex else cap(K.scaled(1 + delta, K.centroid))[1]
        outer.append(v - up <= eps * up)
    checks.append(_check("outer regularity", None, all(outer)))
    return {"capacity": [lo, up], "convex": convex, "checks": checks,
            "passed": all(c["passed"] for c in checks)}


# the cross ----------------------------------------------------------------------

def cross_polygon(a=500.0, b=5.0):
    """Plus-shaped union of ``[-a,a]x[-b,b]`` and its transpose as one ring."""
    ring = [[b, b], [a, b], [a, -b], [b, -b], [b, -a], [-b, -a],
            [-b, -b], [-a, -b], [-a, b], [-b, b], [-b, a], [b, a]]
    return polygon(ring)


def cross_counterexample(family=None, *, a=500.0, b=5.0):
    """Capacity of a long bar, its transpose, and their union.

    Reports the capacities of the two bars, the affine perimeter of the
    diamond ``{|x| + |y| < a}``, and the certified bracket of the union.
    ``status`` is ``superadditive`` when the bracket's lower bound exceeds
    the sum of the two capacities and ``inconclusive at this effort``
    otherwise.
    """
    E = box([-a, -b], [a, b])
    F = box([-b, -a], [b, a])
    cE, cF = capacity_convex(E), capacity_convex(F)
    G = from_rings([np.array([[a, 0], [0, a], [-a, 0], [0, -a]], float)])
    pG = affine_perimeter(G)
    U = cross_polygon(a, b)
    br = capacity_bracket(U, family)
    total = cE + cF
    sup = br.lower > total
    return {
        "C_E": cE, "C_F": cF, "sum": total, "P_diamond": pG,
        "bracket": br, "lower": br.lower, "upper": br.upper,
        "superadditive": bool(sup),
        "status": "superadditive" if sup else "inconclusive at this effort",
    }


# trace constants ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finite sum of point masses."""

    points: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        p = np.atleast_2d(np.asarray(self.points, float))
        m = np.asarray(self.masses, float).reshape(-1)
        if len(m) and p.shape[0] != len(m):
            raise DomainError("points and masses differ in length")
        if np.any(~np.isfinite(m)) or np.any(m <= 0):
            raise DomainError("masses must be positive and finite")
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "masses", m)

    @classmethod
    def zero(cls, n):
        return cls(np.zeros((0, n)), np.zeros(0))

    @property
    def total(self):
        return float(self.masses.sum())

    def mass(self, K, closed=True, tol=1e-12):
        """Mass in ``K`` (closed) or in its interior (``closed=False``)."""
        if len(self.masses) == 0:
            return 0.0
        scale = max(K.diameter, 1.0)
        excess = self.points @ K.normals.T - K.offsets
        inside = np.all(excess <= tol * scale, axis=1) if closed \
            else np.all(excess < -tol * scale, axis=1)
        return float(self.masses[inside].sum())


@dataclass(frozen=True)
class TraceConstants:
    q: float
    kappa2_hat: float
    kappa3_hat: float
    feasibility_slack: float

    def to_dict(self):
        return dict(self.__dict__)

    def to_json(self):
        return _format.dumps(self.to_dict())


def trace_constants(mu, q, test_family):
    """Best observed trace ratios of a discrete measure over convex test sets.

    ``kappa2_hat = max mu(K)^(1/q) / C(K)`` with closed sets and
    ``kappa3_hat = max mu(int K)^(1/q) / P(K)`` with open sets; the reported
    ``feasibility_slack`` is ``q^(1/q) kappa3_hat``.
    """
    family = list(test_family)
    if not family:
        raise DomainError("test family is empty")
    n = family[0].dimension
    if not (1.0 <= q <= n / (n - 1)):
        raise DomainError(f"q must lie in [1, {n / (n - 1):g}]")
    k2 = k3 = 0.0
    for K in family:
        c = capacity_convex(K)
        if not c > 0:
            raise DomainError("test sets need positive affine perimeter")
        k2 = max(k2, mu.mass(K, closed=True) ** (1.0 / q) / c)
        k3 = max(k3, mu.mass(K, closed=False) ** (1.0 / q) / affine_perimeter(K))
    return TraceConstants(q, k2, k3, q ** (1.0 / q) * k3)


def isocapacitary_constant(n, q=None):
    """``omega_n^(1/q) / (2 omega_{n-1})`` with ``q = n/(n-1)`` by default."""
    q = n / (n - 1) if q is None else q
    return omega(n) ** (1.0 / q) / (2 * omega(n - 1))
