"""Seeded random test sets."""

import numpy as np

from .errors import DegeneracyError
from .geometry import convex_hull, polygon


def random_convex_polygon(rng, k=None):
    """Hull of ``k`` Gaussian points (5 to 20 when omitted)."""
    k = int(rng.integers(5, 21)) if k is None else k
    while True:
        pts = rng.normal(size=(k, 2)) * rng.uniform(0.3, 3.0, 2)
        try:
            return convex_hull(pts)
        except DegeneracyError:
            continue


def random_star_polygon(rng, k=None):
    """Star-shaped polygon from jittered angles and random radii.

    Angular gaps stay below pi, so the vertex cycle is simple.
    """
    k = int(rng.integers(6, 17)) if k is None else k
    t = (np.arange(k) + rng.uniform(-0.4, 0.4, k)) * 2 * np.pi / k
    r = rng.uniform(0.3, 1.5, k)
    return polygon(np.column_stack([r * np.cos(t), r * np.sin(t)]))


def random_convex_polytope(rng, n=3, k=None):
    """Hull of ``k`` anisotropic Gaussian points in R^n (8 to 30 when omitted)."""
    k = int(rng.integers(8, 31)) if k is None else k
    while True:
        pts = rng.normal(size=(k, n)) * rng.uniform(0.5, 2.0, n)
        try:
            return convex_hull(pts)
        except DegeneracyError:
            continue


def random_direction(rng, n=2):
    u = rng.normal(size=n)
    return u / np.linalg.norm(u)


def random_atoms(rng, m=None):
    """Planar directions and positive weights spanning the plane."""
    m = int(rng.integers(3, 25)) if m is None else m
    t = rng.uniform(0, 2 * np.pi, m)
    d = np.column_stack([np.cos(t), np.sin(t)])
    return d, rng.uniform(0.1, 3.0, m)
