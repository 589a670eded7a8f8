"""Conversions between planar polytopes and shapely geometries."""

import numpy as np
import shapely
from shapely.geometry import LineString, MultiPolygon, Point, Polygon
from shapely.geometry.polygon import orient

from .errors import DomainError
from .geometry import from_rings


def _signed_area(ring):
    x, y = ring[:, 0], ring[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def to_shapely(P):
    """Shapely geometry of a planar polytope.

    Counter-clockwise rings are shells and clockwise rings are holes; a
    two-point ring becomes a segment.
    """
    if P.dimension != 2:
        raise DomainError("shapely conversion is planar")
    shells, holes, lines = [], [], []
    for ring in P.ring_coordinates():
        if len(ring) == 2:
            lines.append(LineString(ring))
            continue
        a = _signed_area(ring)
        if a > 0:
            shells.append(ring)
        elif a < 0:
            holes.append(ring)
        else:
            lines.append(LineString(np.vstack([ring, ring[:1]])))
    polys = []
    for s in shells:
        sp = Polygon(s)
        own = [h for h in holes if sp.contains(Point(h.mean(axis=0)))
               or sp.contains(Polygon(h).representative_point())]
        polys.append(Polygon(s, own))
    parts = polys + lines
    if not parts:
        raise DomainError("empty planar set")
    return shapely.union_all(parts) if len(parts) > 1 else parts[0]


def polygons(geom):
    if isinstance(geom, Polygon):
        return [geom] if not geom.is_empty else []
    if isinstance(geom, MultiPolygon):
        return list(geom.geoms)
    if hasattr(geom, "geoms"):
        out = []
        for g in geom.geoms:
            out += polygons(g)
        return out
    return []


def from_shapely(geom):
    """Polytope of a (multi)polygon; shells counter-clockwise, holes clockwise."""
    rings = []
    for poly in polygons(geom):
        poly = orient(poly, sign=1.0)
        rings.append(np.asarray(poly.exterior.coords)[:-1])
        for hole in poly.interiors:
            rings.append(np.asarray(hole.coords)[:-1])
    if not rings:
        raise DomainError("geometry has no polygonal part")
    return from_rings(rings)


def vertex_count(geom):
    return int(shapely.get_num_coordinates(geom))


def component_points(geom):
    """Vertex arrays of the connected components of a planar geometry."""
    if hasattr(geom, "geoms"):
        geoms = list(geom.geoms)
    else:
        geoms = [geom]
    merged = shapely.union_all(geoms)
    parts = list(merged.geoms) if hasattr(merged, "geoms") else [merged]
    return [np.asarray(shapely.get_coordinates(p)) for p in parts]
