"""Projection bodies, polar volumes and the perimeter functionals built on them.

For a polyhedral set with surface area measure ``S = sum w_i delta_{nu_i}``
the projection body is the zonotope with support
``h(v) = 1/2 sum w_i |v . nu_i|``.  Its polar has volume
``V = (1/n) int_{S^{n-1}} h^-n du``, and the affine perimeter is
``(2^n omega_n)^(1/n) V^(-1/n)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import cached_property

import numpy as np
from scipy.spatial import ConvexHull

from . import _format
from .errors import ConvexityError, DegeneracyError, DivergenceError, DomainError
from .geometry import (SurfaceAreaMeasure, ball, classical_perimeter, omega,
                       surface_area_measure)
from .sphere import (DEFAULT_ORDER, build_rule, cosine_profile_from_atoms,
                     exact_2d_negative_square_integral,
                     integrate_negative_power)
from .tolerance import DEFAULT_TOL

__all__ = ["ProjectionBody", "projection_body", "polar_volume",
           "polar_vertices", "affine_perimeter", "affine_surface_area",
           "rounding", "rounding_radius", "PerimeterReport",
           "inequality_report", "CSV_COLUMNS"]

MAX_EXACT_PAIRS = 2_000_000

CSV_COLUMNS = ("V", "P_BV", "P_BVd", "V_polar", "petty_ratio",
               "iso_classical", "iso_affine", "slack_e12P")


@dataclass(frozen=True, eq=False)
class ProjectionBody:
    """Zonotope ``h(v) = sum half_weights[i] |v . directions[i]|``."""

    directions: np.ndarray
    half_weights: np.ndarray

    @property
    def dimension(self):
        return self.directions.shape[1]

    @property
    def generators(self):
        return self.directions * self.half_weights[:, None]

    def support(self, v):
        v = np.asarray(v, dtype=float)
        return np.abs(v @ self.directions.T) @ self.half_weights

    __call__ = support

    @cached_property
    def rank(self):
        s = np.linalg.svd(self.generators, compute_uv=False)
        return int(np.sum(s > 1e-12 * s.max())) if s.size else 0

    @property
    def lower_dimensional(self):
        """True when the generators do not span, so the polar is unbounded."""
        return self.rank < self.dimension

    def measure(self):
        """The surface area measure the body was built from."""
        return SurfaceAreaMeasure(self.directions, 2 * self.half_weights)


def projection_body(S):
    """Projection body of a surface area measure (or of a polytope)."""
    if not isinstance(S, SurfaceAreaMeasure):
        S = surface_area_measure(S)
    if len(S) == 0:
        raise DomainError("empty surface area measure")
    return ProjectionBody(np.asarray(S.directions, float),
                          0.5 * np.asarray(S.weights, float))


def polar_vertices(Z, *, tol=DEFAULT_TOL):
    """Vertices of the polar of a planar or spatial zonotope.

    Facet normals of a zonotope are normals of generator pairs (planar:
    normals of single generators); each facet normal ``a`` gives the polar
    vertex ``a / h(a)``.
    """
    g = _folded_generators(Z, tol)
    n = Z.dimension
    if n == 3 and len(g) * (len(g) - 1) // 2 > MAX_EXACT_PAIRS:
        raise DomainError(f"{len(g)} generators are too many for exact "
                          "enumeration; use quadrature")
    if n == 2:
        normals = np.column_stack([-g[:, 1], g[:, 0]])
    elif n == 3:
        i, j = np.triu_indices(len(g), 1)
        normals = np.cross(g[i], g[j])
    else:
        raise DomainError("polar vertex enumeration is implemented for n <= 3")
    length = np.linalg.norm(normals, axis=1)
    keep = length > tol.angle * length.max()
    normals = normals[keep] / length[keep, None]
    normals = np.vstack([normals, -normals])
    h = np.concatenate([np.abs(chunk @ g.T).sum(axis=1)
                        for chunk in np.array_split(normals, 1 + len(normals) // 4096)])
    return normals / h[:, None]


def _folded_generators(Z, tol):
    """Generators with antipodal pairs merged; |v.g| ignores the sign of g."""
    d = Z.directions.copy()
    # orient every direction into the upper half space of its first non-zero axis
    lead = np.argmax(np.abs(d) > tol.angle, axis=1)
    flip = d[np.arange(len(d)), lead] < 0
    d[flip] *= -1
    keys = np.round(d / tol.angle).astype(np.int64)
    _, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    g = np.zeros((inverse.max() + 1, Z.dimension))
    np.add.at(g, inverse, d * Z.half_weights[:, None])
    return g


def _exact_polar_volume(Z):
    pts = polar_vertices(Z)
    return float(ConvexHull(pts).volume)


def polar_volume(Z, rule=None, *, method="auto", order=DEFAULT_ORDER,
                 tol=DEFAULT_TOL):
    """Volume of the polar projection body, ``+inf`` if generators do not span.

    Parameters
    ----------
    Z : ProjectionBody
    rule : QuadratureRule, optional
        Sphere rule for n >= 3; built at ``order`` when omitted.
    method : {"auto", "exact", "quadrature"}
        ``auto`` is the closed-form arc integral in the plane and quadrature
        above.  ``exact`` in R^3 takes the hull volume of the polar vertices,
        which is exact but costs one cross product per generator pair.
    """
    if not isinstance(Z, ProjectionBody):
        Z = projection_body(Z)
    n = Z.dimension
    if Z.lower_dimensional:
        return math.inf
    if method not in ("auto", "exact", "quadrature"):
        raise DomainError(f"unknown method {method!r}")
    if n == 2:
        if method == "quadrature":
            raise DomainError("the plane always uses the exact arc integral")
        profile = cosine_profile_from_atoms(Z.measure(), tol=tol)
        if profile.degenerate:
            return math.inf
        return 0.5 * exact_2d_negative_square_integral(profile)
    if method == "exact":
        return _exact_polar_volume(Z)
    if rule is None:
        rule = build_rule(n, order)
    # V(Z^o) = |det A| V((AZ)^o); with A = M^(-1/2) for the generator moment
    # matrix M the integrand is close to round, and the rule sees the same
    # body for Z and any SL(n) image of it up to a rotation
    g = Z.generators
    evals, evecs = np.linalg.eigh(g.T @ g)
    A = (evecs / np.sqrt(evals)) @ evecs.T
    ga = g @ A
    try:
        total = integrate_negative_power(
            lambda v: np.abs(v @ ga.T).sum(axis=1), n, rule, tol=tol)
    except DivergenceError:
        return math.inf
    return float(np.prod(1 / np.sqrt(evals))) * total / n


def _perimeter_from_polar(v_polar, n):
    if math.isinf(v_polar):
        return 0.0
    return (2 ** n * omega(n) / v_polar) ** (1.0 / n)


def affine_perimeter(E, *, order=DEFAULT_ORDER, method="auto"):
    """Affine perimeter ``(2^n omega_n)^(1/n) V(Pi^o E)^(-1/n)``.

    Zero for sets whose normals do not span, such as flat sets.

    Examples
    --------
    >>> from affcap.geometry import box
    >>> round(affine_perimeter(box([0, 0], [1, 1])), 10)
    2.5066282746
    """
    Z = projection_body(E)
    return _perimeter_from_polar(polar_volume(Z, order=order, method=method),
                                 Z.dimension)


def affine_surface_area(K, *, order=DEFAULT_ORDER, method="auto"):
    """``I_1(K) = 2 (V(Pi^o K) / omega_n)^(-1/n)`` for convex ``K``."""
    if not K.is_convex:
        raise ConvexityError("affine surface area needs a convex body; "
                             "use affine_perimeter for general sets")
    n = K.dimension
    v = polar_volume(projection_body(K), order=order, method=method)
    if math.isinf(v):
        return 0.0
    return 2.0 * (v / omega(n)) ** (-1.0 / n)


def rounding_radius(E):
    """Radius of the centred ball with the volume of ``E``."""
    v = E.volume
    if not v > 0:
        raise DegeneracyError("rounding needs positive volume", E.dimension - 1)
    return (v / omega(E.dimension)) ** (1.0 / E.dimension)


def rounding(E, fineness=None):
    """Polytopal ball of radius :func:`rounding_radius`; see ``geometry.ball``."""
    return ball(E.dimension, rounding_radius(E), fineness)


@dataclass(frozen=True)
class PerimeterReport:
    """Volume, perimeters and the derived isoperimetric ratios of one set.

    ``polar_error`` estimates the quadrature error in ``V_polar``: zero on
    the exact planar path, otherwise the change between orders 32 and the
    working order.
    """

    dimension: int
    V: float
    P_BV: float
    P_BVd: float
    V_polar: float
    petty_ratio: float
    iso_classical: float
    iso_affine: float
    slack_e12P: float
    polar_error: float = 0.0

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return _format.dumps(self.to_dict())

    @staticmethod
    def csv_header():
        return ",".join(CSV_COLUMNS)

    def csv_row(self):
        return ",".join(_format.fmt(getattr(self, c)) for c in CSV_COLUMNS)


def inequality_report(E, *, order=DEFAULT_ORDER, method="auto",
                      error_estimate=True):
    """Evaluate the isoperimetric quantities of a set of positive volume.

    ``petty_ratio = V^(n-1) V(Pi^o E) / (omega_n / omega_{n-1})^n`` is at
    most one; ``iso_affine`` dominates ``iso_classical`` and both are at
    most one; ``slack_e12P = P_BV/(n omega_n) - P_BVd/(2 omega_{n-1})`` is
    nonnegative.
    """
    n = E.dimension
    V = E.volume
    if not V > 0:
        raise DegeneracyError("inequality report needs positive volume", n - 1)
    S = surface_area_measure(E)
    Z = projection_body(S)
    v_polar = polar_volume(Z, order=order, method=method)
    err = 0.0
    if n >= 3 and method != "exact" and error_estimate and not math.isinf(v_polar):
        err = abs(v_polar - polar_volume(Z, order=32))
    P = classical_perimeter(S)
    Pd = _perimeter_from_polar(v_polar, n)
    wn, wn1 = omega(n), omega(n - 1)
    petty = V ** (n - 1) * v_polar / (wn / wn1) ** n
    r_vol = (V / wn) ** (1.0 / n)
    iso_c = r_vol / (P / (n * wn)) ** (1.0 / (n - 1))
    iso_a = r_vol / (Pd / (2 * wn1)) ** (1.0 / (n - 1)) if Pd > 0 else math.inf
    slack = P / (n * wn) - Pd / (2 * wn1)
    return PerimeterReport(n, V, P, Pd, v_polar, petty, iso_c, iso_a, slack, err)
