"""Affine Cheeger constants of planar domains and affine Rayleigh quotients.

The set version minimizes ``P_d(D) / V(D)^(1/q)`` over subsets ``D`` of a
domain ``O``; the value returned is the best quotient found, hence an upper
bound for the infimum.  The function version evaluates

    Lambda(f) = c(p, q) ||f||_{W_d} / ||f||_{L^r},
    ||f||_{W_d} = (int_{S^1} ||u . grad f||_{L^p}^-2 du / (2 pi))^(-1/2),

with ``r = pq / (p - (p - 1) q)`` and ``c = q^((1-q)/q) r``, on continuous
piecewise linear functions.  For ``p = 1`` the inner norm
``sum_t area_t |u . g_t|`` is twice a zonotope support function, so the
circle integral is done in closed form.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import shapely
from scipy.optimize import minimize
from scipy.spatial import Delaunay
from shapely.geometry import Polygon

from . import _format
from ._planar import to_shapely
from .errors import ConfigError, DomainError
from .functionals import affine_perimeter
from .geometry import (LinearMap, Polytope, apply_map, classical_perimeter,
                       polygon, regular_polygon,
                       surface_area_measure)
from .sphere import (_fold, exact_2d_negative_square_integral,
                     profile_from_axes)

__all__ = ["DomainMesh", "disk_mesh", "polygon_mesh", "GridFunction",
           "CheegerResult", "affine_cheeger", "boundary_contact",
           "affine_rayleigh", "RayleighResult", "minimize_rayleigh",
           "rayleigh_exponent"]


@dataclass(frozen=True, eq=False)
class DomainMesh:
    """Triangulation of a planar polygonal domain.

    Attributes
    ----------
    domain : Polytope
    points : ndarray, shape (m, 2)
    triangles : ndarray, shape (t, 3)
        Counter-clockwise vertex indices.
    boundary : ndarray of bool, shape (m,)
        Vertices on the boundary of ``domain``.
    """

    domain: Polytope
    points: np.ndarray
    triangles: np.ndarray
    boundary: np.ndarray

    def __post_init__(self):
        p = self.points[self.triangles]
        e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        cross = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        tri = np.where(cross[:, None] < 0, self.triangles[:, [0, 2, 1]],
                       self.triangles)
        object.__setattr__(self, "triangles", tri)
        if np.any(np.abs(cross) <= 0):
            raise DomainError("mesh has degenerate triangles")
        total = float(np.abs(cross).sum()) / 2
        if abs(total - self.domain.volume) > 1e-9 * self.domain.volume:
            raise DomainError(f"mesh area {total:.12g} differs from domain "
                              f"area {self.domain.volume:.12g}")

    @property
    def areas(self):
        p = self.points[self.triangles]
        e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @property
    def gradient_operator(self):
        """Array ``G`` of shape (t, 2, 3) with ``grad f_t = G[t] @ f[tri[t]]``."""
        p = self.points[self.triangles]
        a = self.areas
        # grad of barycentric coordinate i is rot(opposite edge) / (2 area)
        G = np.empty((len(a), 2, 3))
        for i in range(3):
            e = p[:, (i + 2) % 3] - p[:, (i + 1) % 3]
            G[:, 0, i] = -e[:, 1] / (2 * a)
            G[:, 1, i] = e[:, 0] / (2 * a)
        return G

    @property
    def interior(self):
        return ~self.boundary

    def mapped(self, T):
        """Image under an affine map of determinant one."""
        if not isinstance(T, LinearMap):
            T = LinearMap(T)
        return DomainMesh(apply_map(self.domain, T), T(self.points),
                          self.triangles, self.boundary)


def _delaunay_mesh(O, pts, boundary):
    tri = Delaunay(pts).simplices
    if not O.is_convex:
        c = pts[tri].mean(axis=1)
        geom = to_shapely(O)
        keep = shapely.contains_xy(geom, c[:, 0], c[:, 1])
        tri = tri[keep]
    p = pts[tri]
    e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    cross = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    tri = tri[np.abs(cross) > 1e-14 * max(O.diameter, 1.0) ** 2]
    return DomainMesh(O, pts, tri, boundary)


def disk_mesh(h=0.05, radius=1.0):
    """Concentric-ring mesh of the regular polygon approximating a disk.

    The domain is the regular N-gon with ``N = round(2 pi radius / h)``
    inscribed in the circle; interior rings have spacing about ``h``.
    """
    rings = max(int(math.ceil(radius / h)), 1)
    n_out = max(int(round(2 * math.pi * radius / h)), 8)
    O = regular_polygon(n_out, radius)
    pts = [np.zeros((1, 2))]
    for k in range(1, rings):
        r = radius * k / rings
        m = max(int(round(2 * math.pi * r / h)), 6)
        t = 2 * np.pi * (np.arange(m) + 0.5 * (k % 2)) / m
        pts.append(r * np.column_stack([np.cos(t), np.sin(t)]))
    pts.append(O.vertices)
    pts = np.vstack(pts)
    boundary = np.zeros(len(pts), dtype=bool)
    boundary[-n_out:] = True
    return _delaunay_mesh(O, pts, boundary)


def polygon_mesh(O, h):
    """Mesh of a polygonal domain from boundary samples and a triangular lattice."""
    if O.dimension != 2:
        raise DomainError("meshes are planar")
    geom = to_shapely(O)
    bpts = []
    for ring in O.ring_coordinates():
        for a, b in zip(ring, np.roll(ring, -1, axis=0)):
            k = max(int(math.ceil(np.linalg.norm(b - a) / h)), 1)
            s = np.arange(k)[:, None] / k
            bpts.append(a + s * (b - a))
    bpts = np.vstack(bpts)
    x0, y0, x1, y1 = geom.bounds
    dy = h * math.sqrt(3) / 2
    rows = []
    for j, y in enumerate(np.arange(y0, y1 + dy, dy)):
        xs = np.arange(x0 + (0.5 * h if j % 2 else 0.0), x1 + h, h)
        rows.append(np.column_stack([xs, np.full(len(xs), y)]))
    lat = np.vstack(rows)
    inside = shapely.contains_xy(geom, lat[:, 0], lat[:, 1])
    lat = lat[inside]
    far = shapely.distance(geom.boundary, shapely.points(lat)) > 0.5 * h
    pts = np.vstack([bpts, lat[far]])
    boundary = np.zeros(len(pts), dtype=bool)
    boundary[:len(bpts)] = True
    return _delaunay_mesh(O, pts, boundary)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Continuous piecewise linear function vanishing on the boundary."""

    mesh: DomainMesh
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(len(self.mesh.points))
        if np.any(v[self.mesh.boundary] != 0):
            raise DomainError("grid functions vanish on the boundary")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, mesh, f):
        v = np.asarray(f(mesh.points), dtype=float)
        v = np.where(mesh.boundary, 0.0, v)
        return cls(mesh, v)

    def gradients(self):
        G = self.mesh.gradient_operator
        return np.einsum("tij,tj->ti", G, self.values[self.mesh.triangles])


def rayleigh_exponent(p, q):
    """``r = pq / (p - (p-1) q)``, the Lebesgue exponent paired with (p, q)."""
    if p < 1 or q < 1:
        raise DomainError("p and q must be at least 1")
    d = p - (p - 1) * q
    if d <= 0:
        raise DomainError(f"p = {p} is outside [1, q/(q-1)) for q = {q}")
    return p * q / d


def _prefactor(p, q):
    return q ** ((1 - q) / q) * rayleigh_exponent(p, q)


def _tri_rule(k=6):
    """Collapsed Gauss rule on the reference triangle (barycentric, weights)."""
    x, w = np.polynomial.legendre.leggauss(k)
    x, w = 0.5 * (x + 1), 0.5 * w
    a, b = np.meshgrid(x, x, indexing="ij")
    wa, wb = np.meshgrid(w, w, indexing="ij")
    s, t = a.ravel(), (b * (1 - a)).ravel()
    weights = (wa * wb * (1 - a)).ravel() * 2  # reference area 1/2 -> sum 1
    bary = np.column_stack([1 - s - t, s, t])
    return bary, weights


_BARY, _BARY_W = _tri_rule()


def _lebesgue_norm(mesh, f, r):
    a = mesh.areas
    ft = f[mesh.triangles]
    if r == 1 and np.all(f >= 0):
        return float(np.sum(a * ft.sum(axis=1)) / 3)
    vals = np.abs(ft @ _BARY.T) ** r
    return float(np.sum(a * (vals @ _BARY_W))) ** (1.0 / r)


def _sobolev_norm_p1(grad, area):
    length = np.hypot(grad[:, 0], grad[:, 1])
    keep = length > 1e-14 * max(length.max(), 1e-300)
    if not keep.any():
        return 0.0
    d = grad[keep] / length[keep, None]
    # N(u) = sum area |g . u| = 1/2 sum w |cos| with w = 2 area |g|
    beta, w = _fold(d, 2 * area[keep] * length[keep], 1e-12)
    profile = profile_from_axes(beta, w)
    if profile.degenerate:
        return 0.0
    integral = exact_2d_negative_square_integral(profile)
    return (integral / (2 * math.pi)) ** -0.5


_CIRCLE = 64


def _circle(k):
    t = 2 * np.pi * (np.arange(k) + 0.5) / k
    return np.column_stack([np.cos(t), np.sin(t)])


def _sobolev_norm(grad, area, p, nodes=_CIRCLE):
    if p == 1:
        return _sobolev_norm_p1(grad, area)
    U = _circle(nodes)
    N = (area @ np.abs(grad @ U.T) ** p) ** (1.0 / p)
    if np.any(N <= 0):
        return 0.0
    return float(np.mean(N ** -2.0)) ** -0.5


def affine_rayleigh(f, p=1.0, q=1.0, mesh=None):
    """Affine Rayleigh quotient of a piecewise linear function.

    Parameters
    ----------
    f : GridFunction or array_like
        Values at the mesh vertices; ``mesh`` is required for arrays.
    p, q : float
        ``q >= 1`` and ``1 <= p < q / (q - 1)``.
    """
    if not isinstance(f, GridFunction):
        if mesh is None:
            raise DomainError("a mesh is needed for raw vertex values")
        f = GridFunction(mesh, f)
    mesh = f.mesh
    r = rayleigh_exponent(p, q)
    if not np.any(f.values):
        raise DomainError("the zero function has no Rayleigh quotient")
    w = _sobolev_norm(f.gradients(), mesh.areas, p)
    return _prefactor(p, q) * w / _lebesgue_norm(mesh, f.values, r)


def _rayleigh_and_gradient(mesh, f, p, q, U):
    """Quotient (quadrature in u) and its derivative in the vertex values."""
    G = mesh.gradient_operator
    tri = mesh.triangles
    a = mesh.areas
    g = np.einsum("tij,tj->ti", G, f[tri])
    gu = g @ U.T  # (t, k)
    absgu = np.abs(gu)
    if p == 1:
        N = a @ absgu
        dN_dg = a[:, None] * np.sign(gu)
    else:
        S = a @ absgu ** p
        N = S ** (1.0 / p)
        dN_dg = (a[:, None] * absgu ** (p - 1) * np.sign(gu)) * N ** (1 - p)
    J = np.mean(N ** -2.0)
    W = J ** -0.5
    # dW = W^3 mean(N^-3 dN)
    coef = dN_dg * (N ** -3.0)[None, :] / len(N)
    vt = coef @ U  # (t, 2): derivative w.r.t. the triangle gradient
    dW_tri = W ** 3 * np.einsum("ti,tij->tj", vt, G)
    dW = np.zeros(len(f))
    np.add.at(dW, tri, dW_tri)
    r = rayleigh_exponent(p, q)
    ft = f[tri]
    if r == 1 and np.all(f >= 0):
        L = float(np.sum(a * ft.sum(axis=1)) / 3)
        dL = np.zeros(len(f))
        np.add.at(dL, tri, np.repeat(a[:, None] / 3, 3, axis=1))
    else:
        fq = ft @ _BARY.T
        I = float(np.sum(a * (np.abs(fq) ** r @ _BARY_W)))
        L = I ** (1.0 / r)
        dI_q = r * np.abs(fq) ** (r - 1) * np.sign(fq) * _BARY_W * a[:, None]
        dL = np.zeros(len(f))
        np.add.at(dL, tri, (dI_q @ _BARY) * (L / (r * I)))
    c = _prefactor(p, q)
    val = c * W / L
    grad = c * (dW / L - W * dL / L ** 2)
    return val, grad


@dataclass(frozen=True, eq=False)
class RayleighResult:
    value: float
    function: GridFunction
    trace: list = field(default_factory=list)
    converged: bool = False
    warning: str = ""


def minimize_rayleigh(mesh, p=1.0, q=1.0, iterations=200, seed=0, *,
                      gradient_nodes=512, start=None):
    """Projected normalized gradient descent on the affine Rayleigh quotient.

    Starts from ``start`` (default: one at every interior vertex), keeps
    the function nonnegative and zero on the boundary, and accepts a step
    only when the exactly evaluated quotient decreases.  The seed jitters
    the angular nodes used for the descent direction.
    """
    rng = np.random.default_rng(seed)
    rayleigh_exponent(p, q)
    interior = mesh.interior
    f = interior.astype(float) if start is None else np.array(start, float)
    f[~interior] = 0.0
    best = affine_rayleigh(GridFunction(mesh, f), p, q)
    trace = [(0, best)]
    step = 0.5
    phase = rng.uniform(0, 2 * np.pi / gradient_nodes)
    t = phase + 2 * np.pi * np.arange(gradient_nodes) / gradient_nodes
    U = np.column_stack([np.cos(t), np.sin(t)])
    converged = False
    for it in range(1, iterations + 1):
        _, grad = _rayleigh_and_gradient(mesh, f, p, q, U)
        grad[~interior] = 0.0
        # components pushing into the constraint f >= 0 are dropped
        grad[(f <= 0) & (grad > 0)] = 0.0
        gmax = np.max(np.abs(grad))
        if gmax == 0:
            converged = True
            break
        scale = np.max(f)
        while step > 1e-8:
            trial = np.maximum(f - step * scale * grad / gmax, 0.0)
            trial[~interior] = 0.0
            if np.any(trial):
                v = affine_rayleigh(GridFunction(mesh, trial), p, q)
                if v < best:
                    f, best = trial, v
                    step = min(step * 1.5, 0.5)
                    break
            step *= 0.5
        trace.append((it, best))
        if step <= 1e-8:
            converged = True
            break
    warn = "" if converged else "iteration budget exhausted"
    if warn:
        warnings.warn(f"minimize_rayleigh: {warn}", RuntimeWarning, stacklevel=2)
    return RayleighResult(best, GridFunction(mesh, f), trace, converged, warn)


# set optimization ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CheegerResult:
    """Best affine Cheeger quotient found and the set attaining it."""

    q: float
    value: float
    witness: Polytope
    boundary_contact_distance: float
    classical_value: float
    method: str = ""
    trace: list = field(default_factory=list)

    @property
    def comparison_holds(self):
        """Affine quotient at most ``2/pi`` times the classical one."""
        return self.value <= 2 / math.pi * self.classical_value * (1 + 1e-12)

    def to_dict(self):
        return {
            "q": self.q,
            "value": self.value,
            "classical_value": self.classical_value,
            "boundary_contact_distance": self.boundary_contact_distance,
            "comparison_holds": self.comparison_holds,
            "method": self.method,
            "witness": self.witness.to_dict(),
        }

    def to_json(self):
        return _format.dumps(self.to_dict())


def _quotient(D, q):
    return affine_perimeter(D) / D.volume ** (1.0 / q)


def _classical_quotient(D, q):
    return classical_perimeter(surface_area_measure(D)) / D.volume ** (1.0 / q)


def _ellipse_points(c, angle, aspect, k):
    t = 2 * np.pi * np.arange(k) / k
    pts = np.column_stack([aspect * np.cos(t), np.sin(t) / aspect])
    ca, sa = math.cos(angle), math.sin(angle)
    return pts @ np.array([[ca, sa], [-sa, ca]]) + c


def _max_scale(O, geom, pts, c):
    """Largest s with ``c + s (pts - c)`` inside O."""
    if O.is_convex:
        d = pts - c
        slack = O.offsets - O.normals @ c
        if np.any(slack <= 0):
            return 0.0
        reach = np.max(d @ O.normals.T, axis=0)
        ok = reach > 0
        return float(np.min(slack[ok] / reach[ok]))
    if not shapely.contains_xy(geom, *c):
        return 0.0
    lo, hi = 0.0, O.diameter / max(np.linalg.norm(pts - c, axis=1).max(), 1e-300)
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        if geom.covers(Polygon(c + mid * (pts - c))):
            lo = mid
        else:
            hi = mid
    return lo


def _best_ellipse(O, geom, rng, starts=8, k=256):
    """Inscribed ellipse of (locally) maximal area, as a k-gon."""
    def area(x):
        c, ang, asp = x[:2], x[2], math.exp(x[3])
        pts = _ellipse_points(c, ang, asp, k)
        s = _max_scale(O, geom, pts, c)
        return -s * s

    x0, y0, x1, y1 = geom.bounds
    best = None
    centre = np.asarray(geom.representative_point().coords)[0]
    for i in range(starts):
        c = centre if i == 0 else np.array([rng.uniform(x0, x1),
                                            rng.uniform(y0, y1)])
        if not shapely.contains_xy(geom, *c):
            continue
        x = np.array([c[0], c[1], rng.uniform(0, np.pi), rng.normal(0, 0.3)])
        res = minimize(area, x, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000})
        if best is None or res.fun < best.fun:
            best = res
    if best is None or best.fun >= 0:
        raise ConfigError("no inscribed ellipse found")
    c, ang, asp = best.x[:2], best.x[2], math.exp(best.x[3])
    pts = _ellipse_points(c, ang, asp, k)
    s = _max_scale(O, geom, pts, c) * (1 - 1e-12)
    return polygon(c + s * (pts - c))


def _vertex_search(D, O, geom, q, value, sweeps, rng):
    """Vertex moves with projection onto the domain boundary."""
    pts = D.ring_coordinates()[0].copy()
    step = 0.05 * O.diameter
    moves = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], float)
    boundary = geom.boundary
    room = geom.buffer(1e-12 * O.diameter)
    shapely.prepare(room)
    trace = []
    for sweep in range(sweeps):
        improved = False
        for i in rng.permutation(len(pts)):
            for mv in moves:
                trial = pts.copy()
                x = trial[i] + step * mv
                if not shapely.contains_xy(geom, *x):
                    x = np.asarray(shapely.get_coordinates(
                        shapely.shortest_line(boundary, shapely.points(x))))[0]
                trial[i] = x
                cand = Polygon(trial)
                if not cand.is_valid or cand.area <= 0:
                    continue
                if not room.covers(cand):
                    continue
                Dn = polygon(trial)
                v = _quotient(Dn, q)
                if v < value:
                    pts, value, improved = trial, v, True
                    break
        trace.append((sweep, value))
        if not improved:
            step *= 0.5
            if step < 1e-6 * O.diameter:
                break
    return polygon(pts), value, trace


def affine_cheeger(O, q=1.0, *, seed=0, starts=8, sweeps=20,
                   search_max_vertices=256):
    """Upper bound for the affine q-Cheeger constant of a planar domain.

    Candidates are the domain itself, the largest inscribed ellipse found
    by Nelder-Mead over centre, angle and aspect (its quotient only depends
    on its area), and vertex-wise local searches from both.
    """
    if O.dimension != 2:
        raise DomainError("affine_cheeger is planar")
    if not (1.0 <= q < 2.0):
        raise DomainError("q must lie in [1, 2)")
    if not O.volume > 0:
        raise DomainError("domain must have positive area")
    rng = np.random.default_rng(seed)
    geom = to_shapely(O)
    cands = []
    if len(O.rings()) == 1:
        cands.append(("domain", O, _quotient(O, q)))
    E = _best_ellipse(O, geom, rng, starts)
    cands.append(("ellipse", E, _quotient(E, q)))
    trace = []
    for name, D, v in list(cands):
        if len(D.vertices) <= search_max_vertices and len(D.rings()) == 1:
            Dn, vn, tr = _vertex_search(D, O, geom, q, v, sweeps, rng)
            trace += tr
            cands.append((f"search[{name}]", Dn, vn))
    name, D, v = min(cands, key=lambda c: c[2])
    dist = _boundary_distance(D, geom)
    return CheegerResult(q, v, D, dist, _classical_quotient(D, q), name, trace)


def _boundary_distance(D, geom):
    return float(to_shapely(D).boundary.distance(geom.boundary))


def boundary_contact(result, O):
    """Distance between the witness boundary and the domain boundary."""
    D = result.witness if isinstance(result, CheegerResult) else result
    return _boundary_distance(D, to_shapely(O))
