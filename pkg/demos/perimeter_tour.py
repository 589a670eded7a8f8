"""
Affine perimeter of polygons and polytopes
==========================================

The affine perimeter of a set is computed from its surface area measure:
the measure defines the support function of the projection body, and the
volume of the polar of that body fixes the perimeter.
"""

import math

import numpy as np

import affcap

# A unit square.  Its projection body is a square of side 2, so the polar
# has area 2 and the affine perimeter is sqrt(2 pi).
square = affcap.box([0, 0], [1, 1])
print("square      ", affcap.affine_perimeter(square), math.sqrt(2 * math.pi))

# Shearing the square does not change the value, while the classical
# perimeter grows.
shear = affcap.LinearMap([[1.0, 3.0], [0.0, 1.0]])
sheared = affcap.apply_map(square, shear)
print("sheared     ", affcap.affine_perimeter(sheared),
      affcap.classical_perimeter(affcap.surface_area_measure(sheared)))

# Polygons with many sides approach the disk, whose value is 4.
for k in (8, 64, 1024):
    print(f"{k:5d}-gon   ", affcap.affine_perimeter(affcap.regular_polygon(k)))

# In space the polar volume comes from quadrature on the sphere, or from an
# exact facet enumeration for moderate polytopes.
cube = affcap.box([0, 0, 0], [1, 1, 1])
rep = affcap.inequality_report(cube)
print("cube report ", rep.to_json())

# The Petty ratio is at most one and equals one on ellipses.
rng = np.random.default_rng(0)
from affcap.corpus import random_convex_polygon
ratios = [affcap.inequality_report(random_convex_polygon(rng)).petty_ratio
          for _ in range(20)]
print("petty max   ", max(ratios))
print("ellipse     ", affcap.inequality_report(affcap.ellipse(3, 1, 4096)).petty_ratio)
