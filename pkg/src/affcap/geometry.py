"""Polytopes, convex hulls, volumes, support functions and surface area measures.

A :class:`Polytope` stores vertices together with its boundary facets.  Each
facet carries an outward unit normal, its (n-1)-dimensional measure, the
offset of its supporting hyperplane and, when known, the indices of the
vertices that span it.  In the plane the indices of a facet are an oriented
edge ``(i, j)`` with the interior on the left, so a list of counter-clockwise
rings (clockwise for holes) describes any polygonal set, convex or not.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.spatial import ConvexHull

from .errors import (DegeneracyError, DomainError, InvalidPolytopeError,
                     SingularMapError)
from .tolerance import DEFAULT_TOL

__all__ = [
    "omega", "sphere_area", "Facet", "Polytope", "SurfaceAreaMeasure",
    "LinearMap", "convex_hull", "from_rings", "polygon", "box",
    "regular_polygon", "ellipse", "icosphere", "ball", "segment",
    "surface_area_measure", "volume", "support", "apply_map",
    "classical_perimeter", "random_rotation", "load_polytope",
    "save_polytope", "facet_pairs",
]


def omega(k):
    """Volume of the unit ball in R^k."""
    if int(k) != k or k < 1:
        raise DomainError(f"omega is defined for positive integers, got {k!r}")
    return math.pi ** (k / 2) / math.gamma(1 + k / 2)


def sphere_area(k):
    """Surface area ``k * omega(k)`` of the unit sphere S^{k-1}."""
    return k * omega(k)


def _as_points(points):
    pts = np.array(points, dtype=float)
    if pts.ndim != 2:
        raise DomainError("points must be a 2-d array of shape (m, n)")
    if not np.all(np.isfinite(pts)):
        raise DomainError("points must be finite")
    return pts


def _affine_rank(pts, rtol=1e-10):
    if len(pts) < 2:
        return 0
    diffs = pts[1:] - pts[0]
    s = np.linalg.svd(diffs, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))


@dataclass(frozen=True, eq=False)
class Facet:
    normal: np.ndarray
    measure: float
    offset: float
    indices: tuple = ()


class Polytope:
    """Compact polyhedral set described by vertices and boundary facets.

    Parameters
    ----------
    vertices : array_like, shape (m, n)
    facets : sequence of Facet
    convex : bool, optional
        Known convexity.  Detected from the facet inequalities when omitted.
    """

    def __init__(self, vertices, facets, *, convex=None, tol=DEFAULT_TOL):
        facets = list(facets)
        verts = _as_points(vertices)
        n = verts.shape[1]
        normals = np.array([np.asarray(f.normal, float).reshape(n)
                            for f in facets]).reshape(len(facets), n)
        self._init_arrays(verts, normals,
                          np.array([f.measure for f in facets], float),
                          np.array([f.offset for f in facets], float),
                          [tuple(int(i) for i in f.indices) for f in facets],
                          convex, tol)

    @classmethod
    def from_arrays(cls, vertices, normals, measures, offsets, indices=None,
                    *, convex=None, tol=DEFAULT_TOL):
        """Build from facet arrays; ``indices`` is a list of index tuples."""
        self = cls.__new__(cls)
        verts = _as_points(vertices)
        normals = np.asarray(normals, float).reshape(-1, verts.shape[1])
        if indices is None:
            indices = [()] * len(normals)
        self._init_arrays(verts, normals, np.asarray(measures, float),
                          np.asarray(offsets, float), list(indices), convex, tol)
        return self

    def _init_arrays(self, verts, normals, measures, offsets, indices, convex,
                     tol):
        n = verts.shape[1]
        if n < 2:
            raise DomainError("dimension must be at least 2")
        norm = np.linalg.norm(normals, axis=1)
        if np.any(~np.isfinite(norm)) or np.any(norm == 0.0):
            raise InvalidPolytopeError("facet normal must be non-zero")
        off = np.abs(norm - 1.0) > tol.unit
        if off.any():
            normals = normals.copy()
            normals[off] /= norm[off, None]
        if not np.all(measures > 0):
            raise InvalidPolytopeError("facet measures must be positive")
        for a in (verts, normals, measures, offsets):
            a.setflags(write=False)
        self._vertices = verts
        self._normals = normals
        self._measures = measures
        self._offsets = offsets
        self._indices = tuple(indices)
        self._tol = tol
        if len(measures):
            gap = np.linalg.norm(measures @ normals)
            if gap > tol.closure * measures.sum():
                raise InvalidPolytopeError(
                    f"facets do not close up: |sum w nu| = {gap:.3e}")
        self._convex = convex

    @property
    def dimension(self):
        return self._vertices.shape[1]

    @property
    def vertices(self):
        return self._vertices

    @cached_property
    def facets(self):
        return tuple(Facet(nu, float(w), float(c), idx) for nu, w, c, idx
                     in zip(self._normals, self._measures, self._offsets,
                            self._indices))

    @property
    def facet_indices(self):
        return self._indices

    @property
    def normals(self):
        return self._normals

    @property
    def measures(self):
        return self._measures

    @property
    def offsets(self):
        return self._offsets

    @cached_property
    def diameter(self):
        v = self._vertices
        return float(np.linalg.norm(v.max(axis=0) - v.min(axis=0)))

    @cached_property
    def centroid(self):
        return self._vertices.mean(axis=0)

    @property
    def is_convex(self):
        if self._convex is None:
            self._convex = self._detect_convex()
        return self._convex

    def _detect_convex(self):
        if not len(self._measures):
            return False
        scale = max(self.diameter, 1.0)
        excess = self._vertices @ self.normals.T - self.offsets
        if np.any(excess > 1e-9 * scale):
            return False
        if self.dimension == 2:
            return len(self.rings()) == 1
        return True

    @cached_property
    def volume(self):
        return volume(self)

    def rings(self):
        """Vertex index cycles of a planar boundary, one per component or hole."""
        if self.dimension != 2:
            raise DomainError("rings are defined for planar sets only")
        outgoing = {}
        for idx in self._indices:
            if len(idx) != 2:
                raise InvalidPolytopeError("planar facets need edge indices")
            outgoing.setdefault(idx[0], []).append(idx[1])
        rings = []
        while outgoing:
            start = min(outgoing)
            ring = [start]
            cur = start
            while True:
                nxt = outgoing[cur].pop()
                if not outgoing[cur]:
                    del outgoing[cur]
                if nxt == start:
                    break
                ring.append(nxt)
                cur = nxt
                if cur not in outgoing:
                    raise InvalidPolytopeError("open boundary chain")
            rings.append(ring)
        return rings

    def ring_coordinates(self):
        return [self._vertices[r] for r in self.rings()]

    def contains(self, points, tol=1e-12):
        """Closed-set membership test, valid for convex polytopes only."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        scale = max(self.diameter, 1.0)
        return np.all(pts @ self.normals.T <= self.offsets + tol * scale,
                      axis=1)

    def scaled(self, r, center=None):
        c = np.zeros(self.dimension) if center is None else np.asarray(center)
        return apply_map(self, LinearMap(r * np.eye(self.dimension),
                                         c - r * c))

    def translated(self, shift):
        return apply_map(self, LinearMap(np.eye(self.dimension), shift))

    def to_dict(self):
        d = {
            "dimension": self.dimension,
            "vertices": self._vertices.tolist(),
            "facets": [{"normal": nu.tolist(), "measure": float(w),
                        "offset": float(c), "indices": list(idx)}
                       for nu, w, c, idx in zip(self._normals, self._measures,
                                                self._offsets, self._indices)],
        }
        return d

    @classmethod
    def from_dict(cls, data):
        """Build from the JSON layout; see :func:`load_polytope`."""
        if not isinstance(data, dict) or "vertices" not in data:
            raise InvalidPolytopeError("polytope JSON needs a 'vertices' list")
        verts = _as_points(data["vertices"])
        dim = int(data.get("dimension", verts.shape[1]))
        if verts.shape[1] != dim:
            raise InvalidPolytopeError(
                f"vertices have {verts.shape[1]} coordinates, dimension is {dim}")
        if data.get("facets"):
            facets = []
            for k, f in enumerate(data["facets"]):
                try:
                    facets.append(Facet(np.asarray(f["normal"], float),
                                        float(f["measure"]),
                                        float(f["offset"]),
                                        tuple(f.get("indices", ()))))
                except (KeyError, TypeError, ValueError) as exc:
                    raise InvalidPolytopeError(
                        f"facets[{k}]: missing or invalid field {exc}") from exc
            return cls(verts, facets)
        if data.get("rings"):
            if dim != 2:
                raise InvalidPolytopeError("'rings' is only valid in 2D")
            return from_rings([verts[list(r)] for r in data["rings"]])
        return convex_hull(verts)

    def __repr__(self):
        return (f"Polytope(dimension={self.dimension}, "
                f"vertices={len(self._vertices)}, facets={len(self._measures)})")


@dataclass(frozen=True, eq=False)
class SurfaceAreaMeasure:
    """Atomic measure on S^{n-1}: ``weights[i]`` sits at ``directions[i]``."""

    directions: np.ndarray
    weights: np.ndarray

    @property
    def dimension(self):
        return self.directions.shape[1]

    def __len__(self):
        return len(self.weights)

    def total(self):
        return float(self.weights.sum())

    def centroid_gap(self):
        return float(np.linalg.norm(self.weights @ self.directions))

    def rotated(self, matrix):
        d = self.directions @ np.asarray(matrix, float).T
        return SurfaceAreaMeasure(d, self.weights)


@dataclass(frozen=True, eq=False)
class LinearMap:
    """Affine map ``x -> matrix @ x + translation``."""

    matrix: np.ndarray
    translation: np.ndarray = None

    def __post_init__(self):
        a = np.array(self.matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DomainError("matrix must be square")
        t = (np.zeros(a.shape[0]) if self.translation is None
             else np.array(self.translation, dtype=float).reshape(a.shape[0]))
        a.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "matrix", a)
        object.__setattr__(self, "translation", t)

    @cached_property
    def determinant(self):
        return float(np.linalg.det(self.matrix))

    @property
    def is_special(self):
        return abs(self.determinant - 1.0) < 1e-10

    def __call__(self, points):
        return np.asarray(points, float) @ self.matrix.T + self.translation

    def compose(self, first):
        """The map ``self o first``."""
        return LinearMap(self.matrix @ first.matrix,
                         self.matrix @ first.translation + self.translation)


def _edge_arrays(verts, ring_indices):
    i = np.concatenate([np.asarray(r, dtype=int) for r in ring_indices])
    j = np.concatenate([np.roll(np.asarray(r, dtype=int), -1)
                        for r in ring_indices])
    d = verts[j] - verts[i]
    length = np.hypot(d[:, 0], d[:, 1])
    keep = length > 0
    i, j, d, length = i[keep], j[keep], d[keep], length[keep]
    nu = np.column_stack([d[:, 1], -d[:, 0]]) / length[:, None]
    offset = np.einsum("ij,ij->i", nu, verts[i])
    return nu, length, offset, list(zip(i.tolist(), j.tolist()))


def _edge_polytope(verts, ring_indices, convex=None, tol=DEFAULT_TOL):
    nu, length, offset, idx = _edge_arrays(verts, ring_indices)
    return Polytope.from_arrays(verts, nu, length, offset, idx, convex=convex,
                                tol=tol)


def from_rings(rings, *, tol=DEFAULT_TOL):
    """Planar polyhedral set from oriented rings.

    Outer boundaries run counter-clockwise, holes clockwise.  A ring of two
    points is a flat segment whose two sides carry opposite normals.
    """
    arrays = [_as_points(r) for r in rings]
    if any(a.shape[1] != 2 for a in arrays):
        raise DomainError("rings must be planar")
    verts, index_rings, base = [], [], 0
    for a in arrays:
        if len(a) > 1:
            a = a[np.any(a != np.roll(a, -1, axis=0), axis=1)]
        if len(a) < 2:
            continue
        verts.append(a)
        index_rings.append(list(range(base, base + len(a))))
        base += len(a)
    if not verts:
        raise InvalidPolytopeError("no non-degenerate ring")
    v = np.vstack(verts)
    return _edge_polytope(v, index_rings, tol=tol)


def _signed_area(ring):
    x, y = ring[:, 0], ring[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon(points):
    """Simple polygon from a vertex cycle in either orientation."""
    ring = _as_points(points)
    if _signed_area(ring) < 0:
        ring = ring[::-1]
    return from_rings([ring])


def convex_hull(points, *, tol=DEFAULT_TOL):
    """Convex hull of a point set with merged, outward-oriented facets."""
    pts = _as_points(points)
    m, n = pts.shape
    rank = _affine_rank(pts)
    if rank < n or m < n + 1:
        raise DegeneracyError(
            f"points span an affine subspace of dimension {rank} < {n}", rank)
    hull = ConvexHull(pts)
    if n == 2:
        ring = pts[hull.vertices]  # counter-clockwise for 2-d input
        return _edge_polytope(ring, [range(len(ring))], convex=True, tol=tol)
    used = np.unique(hull.simplices)
    remap = -np.ones(m, dtype=int)
    remap[used] = np.arange(len(used))
    verts = pts[used]
    groups = {}
    for simplex, eq in zip(hull.simplices, hull.equations):
        key = tuple(np.round(eq[:n] / 1e-9).astype(np.int64))
        groups.setdefault(key, []).append((simplex, eq))
    facets = []
    for items in groups.values():
        nu = np.mean([eq[:n] for _, eq in items], axis=0)
        nu /= np.linalg.norm(nu)
        area = sum(_simplex_measure(pts[s]) for s, _ in items)
        if area <= 0:
            continue
        ids = np.unique(np.concatenate([s for s, _ in items]))
        offset = float(np.mean(pts[ids] @ nu))
        if n == 3:
            ids = _order_face(pts[ids], nu, ids)
        facets.append(Facet(nu, area, offset, tuple(int(remap[i]) for i in ids)))
    return Polytope(verts, facets, convex=True, tol=tol)


def _simplex_measure(p):
    """(k-1)-volume of the simplex spanned by the k rows of ``p``."""
    e = p[1:] - p[0]
    g = e @ e.T
    k = len(e)
    return math.sqrt(max(np.linalg.det(g), 0.0)) / math.factorial(k)


def _order_face(p, nu, ids):
    c = p.mean(axis=0)
    a = p[0] - c
    if np.linalg.norm(a) == 0:
        a = p[1] - c
    a /= np.linalg.norm(a)
    b = np.cross(nu, a)
    ang = np.arctan2((p - c) @ b, (p - c) @ a)
    return ids[np.argsort(ang)]


def box(lo, hi):
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    corners = np.array([[hi[i] if (k >> i) & 1 else lo[i]
                         for i in range(len(lo))]
                        for k in range(2 ** len(lo))])
    return convex_hull(corners)


def regular_polygon(k, radius=1.0, center=(0.0, 0.0), phase=0.0):
    t = phase + 2 * np.pi * np.arange(k) / k
    pts = np.column_stack([np.cos(t), np.sin(t)]) * radius + np.asarray(center)
    return _edge_polytope(pts, [range(k)], convex=True)


def ellipse(a, b, k=1024, angle=0.0, center=(0.0, 0.0)):
    """Inscribed k-gon approximation of an ellipse with semi-axes a, b."""
    t = 2 * np.pi * np.arange(k) / k
    pts = np.column_stack([a * np.cos(t), b * np.sin(t)])
    c, s = math.cos(angle), math.sin(angle)
    pts = pts @ np.array([[c, s], [-s, c]]) + np.asarray(center)
    return _edge_polytope(pts, [range(k)], convex=True)


def segment(a, b):
    """Flat planar segment: zero area, two facets of opposite normal."""
    return from_rings([[a, b]])


def _icosahedron():
    p = (1 + math.sqrt(5)) / 2
    v = np.array([[-1, p, 0], [1, p, 0], [-1, -p, 0], [1, -p, 0],
                  [0, -1, p], [0, 1, p], [0, -1, -p], [0, 1, -p],
                  [p, 0, -1], [p, 0, 1], [-p, 0, -1], [-p, 0, 1]], float)
    f = np.array([[0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
                  [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
                  [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
                  [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]])
    return v / np.linalg.norm(v, axis=1, keepdims=True), f


def icosphere(subdivisions=4, radius=1.0):
    """Subdivided icosahedron with vertices on the sphere; 20 * 4^s faces."""
    v, faces = _icosahedron()
    verts = list(v)
    for _ in range(subdivisions):
        cache, new = {}, []

        def mid(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                p = verts[i] + verts[j]
                verts.append(p / np.linalg.norm(p))
                cache[key] = len(verts) - 1
            return cache[key]

        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        faces = np.array(new)
    pts = np.array(verts) * radius
    facets = []
    for tri in faces:
        p = pts[tri]
        cr = np.cross(p[1] - p[0], p[2] - p[0])
        area = 0.5 * np.linalg.norm(cr)
        nu = cr / (2 * area)
        if nu @ p.mean(axis=0) < 0:
            nu, tri = -nu, tri[::-1]
        facets.append(Facet(nu, area, float(nu @ p[0]), tuple(int(i) for i in tri)))
    return Polytope(pts, facets, convex=True)


def ball(n, radius=1.0, fineness=None):
    """Polytopal approximation of the centred ball of the given radius.

    ``fineness`` is the exponent k of a regular 2^k-gon in the plane and the
    number of icosahedral subdivisions in R^3.  Higher dimensions use the
    hull of a spherical quadrature grid of order ``fineness``.
    """
    if n == 2:
        return regular_polygon(2 ** (12 if fineness is None else fineness), radius)
    if n == 3:
        return icosphere(4 if fineness is None else fineness, radius)
    from .sphere import build_rule
    rule = build_rule(n, 8 if fineness is None else fineness)
    return convex_hull(radius * rule.nodes)


def surface_area_measure(P, *, tol=DEFAULT_TOL):
    """Atoms ``(normal, facet measure)`` with near-identical normals merged."""
    if not len(P.measures):
        raise InvalidPolytopeError("polytope has no facets")
    keys = np.round(P.normals / tol.angle).astype(np.int64)
    _, first, inverse = np.unique(keys, axis=0, return_index=True,
                                  return_inverse=True)
    inverse = inverse.ravel()
    w = np.bincount(inverse, weights=P.measures)
    d = np.zeros((len(first), P.dimension))
    np.add.at(d, inverse, P.normals * P.measures[:, None])
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    d.setflags(write=False)
    w.setflags(write=False)
    return SurfaceAreaMeasure(d, w)


def volume(P):
    """Lebesgue measure from the cone decomposition over boundary facets."""
    if not len(P.measures):
        return 0.0
    c = P.centroid
    heights = P.offsets - P.normals @ c
    return float(heights @ P.measures) / P.dimension


def support(P, v):
    """``max_x x . v`` over the vertices; ``v`` may be a stack of directions."""
    v = np.asarray(v, dtype=float)
    if v.ndim == 2:
        return np.max(v @ P.vertices.T, axis=1)
    if not np.any(v):
        return 0.0
    return float(np.max(P.vertices @ v))


def apply_map(P, T):
    """Image of ``P`` under an invertible affine map.

    Normals transform with the inverse transpose and facet measures follow
    the cofactor rule, so the result is exact for non-convex sets as well.
    """
    if not isinstance(T, LinearMap):
        T = LinearMap(T)
    det = T.determinant
    scale = np.max(np.abs(T.matrix)) ** P.dimension
    if not np.isfinite(det) or abs(det) <= 1e-14 * max(scale, 1e-300):
        raise SingularMapError(f"map is singular (det = {det:.3e})")
    inv_t = np.linalg.inv(T.matrix).T
    g = P.normals @ inv_t.T
    gn = np.linalg.norm(g, axis=1)
    nu = g / gn[:, None]
    measure = abs(det) * gn * P.measures
    offset = (P.offsets + g @ T.translation) / gn
    idx = P.facet_indices
    if det < 0:
        idx = [i[::-1] for i in idx]
    return Polytope.from_arrays(T(P.vertices), nu, measure, offset, idx,
                                convex=P._convex)


def classical_perimeter(S):
    """Total mass of the surface area measure, i.e. the boundary measure."""
    if len(S) == 0:
        raise InvalidPolytopeError("empty surface area measure")
    return float(np.sum(S.weights))


def random_rotation(n, rng):
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def load_polytope(path):
    """Read polytope JSON.

    Layout: ``{"dimension": n, "vertices": [[...]], "facets": [{"normal",
    "measure", "offset", "indices"?}]}``.  Without ``facets`` a planar set may
    give ``"rings"`` (lists of vertex indices); otherwise the convex hull of
    the vertices is used.
    """
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return Polytope.from_dict(data)


def save_polytope(P, path):
    Path(path).write_text(json.dumps(P.to_dict()) + "\n", encoding="utf-8")


def facet_pairs(P):
    """Unordered vertex-index pairs along facet boundaries (3D edges)."""
    edges = set()
    for ids in P.facet_indices:
        for a, b in zip(ids, ids[1:] + ids[:1]):
            edges.add((min(a, b), max(a, b)))
    return sorted(edges)

