"""
Capacity of a cross and the affine Cheeger constant of the disk
===============================================================

For convex sets the capacity is the affine perimeter.  For the union of a
long horizontal bar and its transpose, certified lower and upper bounds
show that the capacity of the union exceeds the sum of the parts.
"""

import math

import affcap

res = affcap.cross_counterexample()
print("C(E) =", res["C_E"], " C(F) =", res["C_F"], " sum =", res["sum"])
print("bracket for the union:", res["lower"], "to", res["upper"])
print("status:", res["status"])

# The Cheeger problem on the unit disk is solved by the disk itself.
mesh = affcap.disk_mesh(0.1)
h = affcap.affine_cheeger(mesh.domain, 1.0, starts=3, sweeps=4)
print("set value", h.value, "target", 4 / math.pi,
      "contact", h.boundary_contact_distance)

# The relaxed problem over functions gives an upper estimate on the mesh.
lam = affcap.minimize_rayleigh(mesh, 1, 1, iterations=40)
print("function value", lam.value)
