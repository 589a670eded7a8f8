"""
Steiner symmetrization decreases the affine perimeter
=====================================================

Repeated symmetrization in generic directions drives a set towards a
disk.  The trace records the affine perimeter, the classical perimeter and
the Petty ratio after every step.
"""

import math

import numpy as np

import affcap
from affcap.corpus import random_star_polygon

# Golden-angle directions avoid the symmetry axes of the square, which
# would leave it fixed.
g = (math.sqrt(5) - 1) / 2 * math.pi
dirs = [[math.cos(k * g), math.sin(k * g)] for k in range(12)]
trace = affcap.iterate_symmetrization(affcap.box([0, 0], [1, 1]), dirs)
print(affcap.trace_csv(trace))

# The same holds for non-convex sets: one symmetrization already makes a
# star-shaped polygon convex in the chosen direction.
star = random_star_polygon(np.random.default_rng(2))
r = affcap.verify_monotonicity(star, [0.3, 1.0])
print("star before", r.perimeter_before, "after", r.perimeter_after)

# Rounding: the disk of equal area has the smallest affine perimeter.
print(affcap.verify_rounding(star).to_dict())
