"""Steiner symmetrization of polyhedral sets and monotonicity checks.

Planar sets are handled exactly.  Write ``x = z w + t u`` with ``w`` the unit
vector orthogonal to ``u`` (so that ``(w, u)`` is positively oriented).
Between consecutive vertex abscissae ``z`` the line ``{z w + t u}`` meets the
same boundary edges, so each chord endpoint is an affine function of ``z``
and so is the chord length ``m(z)``.  Edges parallel to ``u`` only produce
jumps of ``m``; they are handled by taking one-sided limits at the
breakpoints, so no perturbation of the input is needed.

In space only convex inputs are supported: there ``m`` is concave and
piecewise affine over the arrangement of the projected edges, so the
symmetral is the convex hull of ``(z, +-m(z)/2)`` over the arrangement
vertices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _format
from .errors import AffcapError, ConvexityError, DegeneracyError, DomainError
from .functionals import (affine_perimeter, inequality_report, polar_vertices,
                          projection_body, rounding_radius)
from .geometry import (Polytope, ball, classical_perimeter, convex_hull,
                       facet_pairs, from_rings, surface_area_measure)

__all__ = ["ChordCell", "ChordPartition", "chord_partition", "steiner",
           "SteinerResult", "verify_monotonicity", "RoundingReport",
           "verify_rounding", "TraceRow", "iterate_symmetrization",
           "trace_csv", "verify_polar_inclusion", "InequalityViolation",
           "steiner_set", "SymmetrizationTrace"]


class InequalityViolation(AffcapError, AssertionError):
    """A numerically checked inequality failed; ``report`` holds the inputs."""

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


def _unit(u, n):
    u = np.asarray(u, dtype=float).reshape(n)
    norm = np.linalg.norm(u)
    if not norm > 0:
        raise DomainError("direction must be non-zero")
    return u / norm


def _frame2(u):
    """Orthonormal ``(w, u)`` with determinant +1."""
    return np.array([u[1], -u[0]])


@dataclass(frozen=True, eq=False)
class ChordCell:
    """Interval ``[z0, z1]`` of u-perp on which the chords vary affinely.

    ``lower[k]`` and ``upper[k]`` are ``(a, b)`` pairs: the k-th chord is
    ``a + b z <= t <= ...`` from the bottom up.
    """

    z0: float
    z1: float
    lower: np.ndarray
    upper: np.ndarray

    @property
    def count(self):
        return len(self.lower)

    def intervals(self, z):
        lo = self.lower[:, 0] + self.lower[:, 1] * z
        hi = self.upper[:, 0] + self.upper[:, 1] * z
        return np.column_stack([lo, hi])

    def chord_length(self, z):
        d = self.upper - self.lower
        return float(np.sum(d[:, 0] + d[:, 1] * z))


@dataclass(frozen=True, eq=False)
class ChordPartition:
    """Cells covering ``{z : m(z) > 0}`` for a planar set and direction."""

    direction: np.ndarray
    perp: np.ndarray
    cells: tuple

    def _cell(self, z):
        for c in self.cells:
            if c.z0 <= z <= c.z1:
                return c
        return None

    def chord_length(self, z):
        c = self._cell(z)
        return 0.0 if c is None else c.chord_length(z)

    def intervals(self, z):
        c = self._cell(z)
        return np.zeros((0, 2)) if c is None else c.intervals(z)


def _edges_zt(E, u):
    """Edges in ``(z, t)`` coordinates with their outward normal sign along u."""
    w = _frame2(u)
    V = E.vertices
    z, t = V @ w, V @ u
    idx = np.array(E.facet_indices, dtype=int)
    side = np.sign(E.normals @ u)
    return z, t, idx, side


def _breakpoints(z, scale):
    zs = np.sort(z)
    keep = np.concatenate([[True], np.diff(zs) > 1e-12 * scale])
    return zs[keep]


def _interval_edges(z, t, idx, Z, k, eps):
    """Non-vertical edges spanning ``[Z[k], Z[k+1]]`` as (lo, hi) lines in z."""
    za, zb = z[idx[:, 0]], z[idx[:, 1]]
    lo, hi = np.minimum(za, zb), np.maximum(za, zb)
    span = (lo <= Z[k] + eps) & (hi >= Z[k + 1] - eps) & (hi - lo > eps)
    sel = np.nonzero(span)[0]
    a, b = idx[sel, 0], idx[sel, 1]
    slope = (t[b] - t[a]) / (z[b] - z[a])
    icpt = t[a] - slope * z[a]
    return sel, icpt, slope


def chord_partition(E, u):
    """Chord structure of a planar polyhedral set along direction ``u``.

    Returns a :class:`ChordPartition` whose cells are the maximal intervals
    between vertex abscissae; chords inside a cell are listed bottom-up as
    affine functions of ``z``.
    """
    if E.dimension != 2:
        raise DomainError("chord partitions are built for planar sets; "
                          "spatial convex sets go through steiner directly")
    u = _unit(u, 2)
    z, t, idx, side = _edges_zt(E, u)
    scale = max(E.diameter, 1.0)
    eps = 1e-12 * scale
    Z = _breakpoints(z, scale)
    cells = []
    for k in range(len(Z) - 1):
        sel, a, b = _interval_edges(z, t, idx, Z, k, eps)
        if len(sel) == 0:
            continue
        zm = 0.5 * (Z[k] + Z[k + 1])
        order = np.argsort(a + b * zm, kind="stable")
        s = side[sel][order]
        lines = np.column_stack([a[order], b[order]])
        low, up = lines[s < 0], lines[s > 0]
        if len(low) != len(up):
            raise DomainError("boundary is not a closed simple polygon")
        cells.append(ChordCell(float(Z[k]), float(Z[k + 1]), low, up))
    return ChordPartition(u, _frame2(u), tuple(cells))


def _chord_profile(E, u):
    """Breakpoints and one-sided chord lengths ``m(Z_k^+)``, ``m(Z_{k+1}^-)``."""
    z, t, idx, side = _edges_zt(E, u)
    scale = max(E.diameter, 1.0)
    eps = 1e-12 * scale
    Z = _breakpoints(z, scale)
    za, zb = z[idx[:, 0]], z[idx[:, 1]]
    lo, hi = np.minimum(za, zb), np.maximum(za, zb)
    ok = hi - lo > eps
    # edge e covers the intervals k with Z[k] >= lo - eps and Z[k+1] <= hi + eps
    i0 = np.searchsorted(Z, lo - eps, side="left")
    i1 = np.searchsorted(Z, hi + eps, side="right") - 1
    count = np.where(ok, np.maximum(i1 - i0, 0), 0)
    edge = np.repeat(np.arange(len(idx)), count)
    k = np.arange(count.sum()) - np.repeat(np.cumsum(count) - count, count) \
        + np.repeat(i0, count)
    a, b = idx[edge, 0], idx[edge, 1]
    slope = (t[b] - t[a]) / (z[b] - z[a])
    s = side[edge]
    n = len(Z) - 1
    right = np.bincount(k, weights=s * (t[a] + slope * (Z[k] - z[a])), minlength=n)
    left = np.bincount(k, weights=s * (t[a] + slope * (Z[k + 1] - z[a])),
                       minlength=n)
    return Z, np.maximum(right[:n], 0.0), np.maximum(left[:n], 0.0)


def _drop_collinear(ring, scale):
    pts = np.asarray(ring, dtype=float)
    while len(pts) > 3:
        nxt = np.roll(pts, -1, axis=0)
        keep = np.max(np.abs(nxt - pts), axis=1) > 1e-14 * scale
        pts = pts[keep]
        d1 = pts - np.roll(pts, 1, axis=0)
        d2 = np.roll(pts, -1, axis=0) - pts
        cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        flat = (np.abs(cross) <= 1e-13 * scale * scale) & \
            (np.sum(d1 * d2, axis=1) >= 0)
        if not flat.any():
            break
        # drop every other flat vertex so neighbours are re-tested next pass
        drop = flat & ~np.roll(flat, 1)
        pts = pts[~drop]
    return pts


def _steiner_2d(E, u):
    Z, mr, ml = _chord_profile(E, u)
    scale = max(E.diameter, 1.0)
    tiny = 1e-14 * scale
    w = _frame2(u)
    rings = []
    k, K = 0, len(Z) - 1
    while k < K:
        if mr[k] <= tiny and ml[k] <= tiny:
            k += 1
            continue
        # maximal run of intervals k..j with m not pinching to zero inside
        j = k
        while j + 1 < K and (ml[j] > tiny or mr[j + 1] > tiny) \
                and (mr[j + 1] > tiny or ml[j + 1] > tiny):
            j += 1
        bottom = []
        for i in range(k, j + 2):
            m_minus = ml[i - 1] if i > k else 0.0
            m_plus = mr[i] if i <= j else 0.0
            bottom.append((Z[i], -0.5 * m_minus))
            bottom.append((Z[i], -0.5 * m_plus))
        top = [(zz, -tt) for zz, tt in reversed(bottom)]
        pts = np.array(bottom + top)
        pts = _drop_collinear(pts, scale)
        if len(pts) >= 3:
            rings.append(pts[:, :1] * w + pts[:, 1:] * u)
        k = j + 1
    if not rings:
        raise DegeneracyError("symmetral is empty", 1)
    return from_rings(rings)


def _clip_lengths(K, base, u, zs):
    """Chord lengths of a convex polytope along lines ``z @ base + t u``."""
    nu, c = K.normals, K.offsets
    a = nu @ u
    b = c[None, :] - (zs @ base) @ nu.T
    eps = 1e-12 * max(K.diameter, 1.0)
    up = a > eps
    dn = a < -eps
    par = ~(up | dn)
    tmax = np.min(np.where(up, b / np.where(up, a, 1.0), np.inf), axis=1)
    tmin = np.max(np.where(dn, b / np.where(dn, a, 1.0), -np.inf), axis=1)
    feasible = np.all(~par | (b >= -eps), axis=1)
    m = np.where(feasible, tmax - tmin, 0.0)
    return np.maximum(m, 0.0)


def _segment_intersections(P, Q):
    """Pairwise intersection points of planar segments P[i] = (p0, p1)."""
    p0, r = P[:, 0], P[:, 1] - P[:, 0]
    i, j = np.triu_indices(len(P), 1)
    rxs = r[i, 0] * r[j, 1] - r[i, 1] * r[j, 0]
    ok = np.abs(rxs) > 1e-14
    i, j, rxs = i[ok], j[ok], rxs[ok]
    qp = p0[j] - p0[i]
    s = (qp[:, 0] * r[j, 1] - qp[:, 1] * r[j, 0]) / rxs
    tt = (qp[:, 0] * r[i, 1] - qp[:, 1] * r[i, 0]) / rxs
    inside = (s > 0) & (s < 1) & (tt > 0) & (tt < 1)
    return p0[i[inside]] + s[inside, None] * r[i[inside]]


def _steiner_3d(K, u):
    if not K.is_convex:
        raise ConvexityError("spatial Steiner symmetrization is implemented "
                             "for convex polytopes only")
    q, _ = np.linalg.qr(np.column_stack([u, np.eye(3)]))
    base = q[:, 1:3].T
    if np.linalg.det(np.vstack([base, u])) < 0:
        base = base[::-1]
    zv = K.vertices @ base.T
    edges = np.array(facet_pairs(K))
    segs = np.stack([zv[edges[:, 0]], zv[edges[:, 1]]], axis=1)
    zs = np.vstack([zv, _segment_intersections(segs, segs)])
    m = _clip_lengths(K, base, u, zs)
    keep = m > 1e-12 * max(K.diameter, 1.0)
    pts = np.vstack([zs @ base + 0.5 * m[:, None] * u,
                     zs[~keep] @ base,
                     zs[keep] @ base - 0.5 * m[keep, None] * u])
    return convex_hull(pts)


def steiner_set(E, u):
    """Steiner symmetral of ``E`` in direction ``u`` as a polytope."""
    u = _unit(u, E.dimension)
    if E.dimension == 2:
        return _steiner_2d(E, u)
    if E.dimension == 3:
        return _steiner_3d(E, u)
    raise DomainError("Steiner symmetrization is implemented for n = 2, 3")


@dataclass(frozen=True, eq=False)
class SteinerResult:
    input: Polytope
    direction: np.ndarray
    output: Polytope
    perimeter_before: float
    perimeter_after: float
    volume_before: float
    volume_after: float
    classical_before: float
    classical_after: float
    passed: bool | None = None

    def to_dict(self):
        return {
            "direction": self.direction,
            "volume_before": self.volume_before,
            "volume_after": self.volume_after,
            "affine_perimeter_before": self.perimeter_before,
            "affine_perimeter_after": self.perimeter_after,
            "perimeter_before": self.classical_before,
            "perimeter_after": self.classical_after,
            "passed": self.passed,
            "output": self.output.to_dict(),
        }

    def to_json(self):
        return _format.dumps(self.to_dict())


def _perimeter_method(P):
    # polyhedra small enough for exact polar enumeration avoid quadrature noise
    return "exact" if P.dimension == 3 else "auto"


def steiner(E, u):
    """Symmetrize ``E`` along ``u`` and record volumes and perimeters."""
    u = _unit(u, E.dimension)
    out = steiner_set(E, u)
    method = _perimeter_method(E)
    return SteinerResult(
        E, u, out,
        affine_perimeter(E, method=method), affine_perimeter(out, method=method),
        E.volume, out.volume,
        classical_perimeter(surface_area_measure(E)),
        classical_perimeter(surface_area_measure(out)))


def verify_monotonicity(E, u, *, tol=1e-9, strict=False):
    """Check that Steiner symmetrization does not raise the affine perimeter.

    For convex inputs the capacity equals the affine perimeter, so the same
    comparison also checks capacity monotonicity.  Volume must be preserved
    to ``1e-10`` relative.  With ``strict`` a failure raises
    :class:`InequalityViolation` carrying the serialized input.
    """
    r = steiner(E, u)
    scale = max(r.perimeter_before, 1.0)
    ok = (r.perimeter_after <= r.perimeter_before + tol * scale
          and abs(r.volume_after - r.volume_before)
          <= 1e-10 * max(abs(r.volume_before), 1e-300))
    r = SteinerResult(**{**r.__dict__, "passed": bool(ok)})
    if strict and not ok:
        raise InequalityViolation(
            "Steiner symmetrization increased the affine perimeter",
            {"input": E.to_dict(), "direction": r.direction.tolist(),
             "before": r.perimeter_before, "after": r.perimeter_after})
    return r


@dataclass(frozen=True)
class RoundingReport:
    radius: float
    perimeter: float
    rounded_perimeter: float
    passed: bool

    def to_dict(self):
        return dict(self.__dict__)


_BALL_CACHE = {}


def _unit_ball_perimeter(n, fineness):
    key = (n, fineness)
    if key not in _BALL_CACHE:
        _BALL_CACHE[key] = affine_perimeter(ball(n, 1.0, fineness))
    return _BALL_CACHE[key]


def verify_rounding(E, *, tol=1e-6, fineness=None):
    """Compare the affine perimeter of ``E`` with that of its rounding.

    The rounding is the polytopal ball from :func:`functionals.rounding`;
    its perimeter is evaluated once on the unit ball and scaled by
    ``r^(n-1)``.
    """
    n = E.dimension
    r = rounding_radius(E)
    p_round = _unit_ball_perimeter(n, fineness) * r ** (n - 1)
    p = affine_perimeter(E, method=_perimeter_method(E))
    return RoundingReport(r, p, p_round, bool(p_round <= p + tol * max(p, 1.0)))


@dataclass(frozen=True)
class TraceRow:
    step: int
    P_BVd: float
    P_BV: float
    petty_ratio: float


@dataclass(frozen=True, eq=False)
class SymmetrizationTrace:
    rows: list
    final: Polytope
    monotone: bool = field(default=True)


def iterate_symmetrization(E, directions, max_steps=None, *, tol=1e-9):
    """Apply Steiner symmetrizations in turn and record the functionals.

    ``directions`` is cycled until ``max_steps`` steps are done (one pass
    when ``max_steps`` is None).  ``monotone`` reports whether the affine
    perimeter column never increased by more than ``tol`` relative.
    """
    directions = [np.asarray(d, float) for d in directions]
    steps = len(directions) if max_steps is None else int(max_steps)
    rep = inequality_report(E, error_estimate=False)
    rows = [TraceRow(0, rep.P_BVd, rep.P_BV, rep.petty_ratio)]
    cur, monotone = E, True
    for s in range(1, steps + 1):
        cur = steiner_set(cur, directions[(s - 1) % len(directions)])
        rep = inequality_report(cur, error_estimate=False)
        if rep.P_BVd > rows[-1].P_BVd + tol * max(rows[-1].P_BVd, 1.0):
            monotone = False
        rows.append(TraceRow(s, rep.P_BVd, rep.P_BV, rep.petty_ratio))
    return SymmetrizationTrace(rows, cur, monotone)


def trace_csv(trace):
    lines = ["step,P_BVd,P_BV,petty_ratio"]
    for r in trace.rows:
        lines.append(",".join([str(r.step), _format.fmt(r.P_BVd),
                               _format.fmt(r.P_BV), _format.fmt(r.petty_ratio)]))
    return "\n".join(lines) + "\n"


def _boundary_samples(P, count, rng):
    if P.dimension == 2:
        V = P.vertices
        idx = np.array(P.facet_indices)
        pick = rng.choice(len(idx), size=count, p=P.measures / P.measures.sum())
        s = rng.random(count)[:, None]
        return V[idx[pick, 0]] * (1 - s) + V[idx[pick, 1]] * s
    tris = []
    for f in P.facets:
        ids = f.indices
        for a in range(1, len(ids) - 1):
            tris.append((ids[0], ids[a], ids[a + 1]))
    tris = np.array(tris)
    p = P.vertices[tris]
    area = 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]),
                                axis=1)
    pick = rng.choice(len(tris), size=count, p=area / area.sum())
    r1, r2 = rng.random(count), rng.random(count)
    flip = r1 + r2 > 1
    r1[flip], r2[flip] = 1 - r1[flip], 1 - r2[flip]
    q = p[pick]
    return q[:, 0] + r1[:, None] * (q[:, 1] - q[:, 0]) + r2[:, None] * (q[:, 2] - q[:, 0])


def verify_polar_inclusion(E, u=None, *, samples=1000, seed=0, tol=1e-8):
    """Check ``S_u(Pi^o E)`` is contained in ``Pi^o S_u(E)`` on boundary samples.

    A point x lies in the polar projection body of a set L exactly when
    ``h_{Pi L}(x) <= 1``.  Returns the largest observed ``h - 1`` together
    with the pass flag.
    """
    n = E.dimension
    u = np.eye(n)[-1] if u is None else _unit(u, n)
    polar = convex_hull(polar_vertices(projection_body(E)))
    left = steiner_set(polar, u)
    right = projection_body(steiner_set(E, u))
    pts = _boundary_samples(left, samples, np.random.default_rng(seed))
    excess = float(np.max(right.support(pts)) - 1.0)
    return excess, bool(excess <= tol)

