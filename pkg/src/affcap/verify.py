"""Batch verification of the inequalities and invariances over a random corpus."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull

from . import _format
from .capacity import CandidateFamily, capacity_bracket, random_special_linear
from .corpus import (random_convex_polygon, random_convex_polytope,
                     random_direction, random_star_polygon)
from .functionals import (affine_perimeter, inequality_report, polar_volume,
                          projection_body)
from .geometry import LinearMap, apply_map
from .symmetrize import verify_monotonicity, verify_rounding


@dataclass
class Check:
    name: str
    worst: float
    bound: float
    passed: bool
    samples: int

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.name}: worst={_format.fmt(self.worst)} "
                f"bound={_format.fmt(self.bound)} n={self.samples}")


@dataclass
class VerifyReport:
    seed: int
    count: int
    checks: list

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def text(self):
        lines = [f"corpus=random count={self.count} seed={self.seed}"]
        lines += [c.line() for c in self.checks]
        lines.append("ALL PASS" if self.passed else "SOME CHECKS FAILED")
        return "\n".join(lines) + "\n"

    def to_dict(self):
        return {"seed": self.seed, "count": self.count, "passed": self.passed,
                "checks": [c.__dict__ for c in self.checks]}


def _upper(name, values, bound):
    worst = max(values) if values else -math.inf
    return Check(name, worst, bound, bool(worst <= bound), len(values))


def _lower(name, values, bound):
    worst = min(values) if values else math.inf
    return Check(name, worst, bound, bool(worst >= bound), len(values))


def _direct_polar_area(P):
    """Area of the polar projection body from its vertices.

    The polar of the zonotope ``h(v) = 1/2 sum w |v . nu|`` has one vertex
    per edge direction of the zonotope, ``nu_perp / h(nu_perp)`` and its
    negative.
    """
    Z = projection_body(P)
    d = np.column_stack([-Z.directions[:, 1], Z.directions[:, 0]])
    d = np.vstack([d, -d])
    return float(ConvexHull(d / Z.support(d)[:, None]).volume)


def run_verify(count=50, seed=0):
    """Run every corpus check; the report is a deterministic function of the inputs."""
    rng = np.random.default_rng(seed)
    convex = [random_convex_polygon(rng) for _ in range(count)]
    stars = [random_star_polygon(rng) for _ in range(count)]
    solids = [random_convex_polytope(rng) for _ in range(max(count // 5, 1))]
    checks = []

    reps = [inequality_report(P) for P in convex]
    star_reps = [inequality_report(P) for P in stars]
    solid_reps = [inequality_report(P, method="exact") for P in solids]
    checks.append(_upper("petty 2d", [r.petty_ratio for r in reps], 1 + 1e-6))
    checks.append(_upper("petty 3d", [r.petty_ratio for r in solid_reps],
                         1 + 2e-3))
    checks.append(_lower("perimeter radii",
                         [r.slack_e12P for r in reps + star_reps + solid_reps],
                         -1e-9))
    checks.append(_lower("affine vs classical isoperimetric",
                         [r.iso_affine - r.iso_classical
                          for r in reps + solid_reps], -1e-9))
    checks.append(_upper("isoperimetric ratio",
                         [r.iso_affine for r in reps + star_reps + solid_reps],
                         1 + 1e-9))

    scale_err, sl_err = [], []
    for P in convex:
        p = affine_perimeter(P)
        for r in (0.5, 2.0, 3.0):
            scale_err.append(abs(affine_perimeter(P.scaled(r)) / (r * p) - 1))
        T = LinearMap(random_special_linear(2, rng), rng.normal(size=2) * 5)
        sl_err.append(abs(affine_perimeter(apply_map(P, T)) / p - 1))
    checks.append(_upper("scaling", scale_err, 1e-9))
    checks.append(_upper("special linear invariance", sl_err, 1e-8))

    polar_err = [abs(polar_volume(projection_body(P)) / _direct_polar_area(P) - 1)
                 for P in convex[:20]]
    checks.append(_upper("polar area cross-check", polar_err, 1e-10))

    steiner_gap, vol_err, rounding_gap = [], [], []
    for k in range(count):
        P = convex[k] if k % 2 == 0 else stars[k]
        r = verify_monotonicity(P, random_direction(rng))
        steiner_gap.append((r.perimeter_after - r.perimeter_before)
                           / r.perimeter_before)
        vol_err.append(abs(r.volume_after / r.volume_before - 1))
        rr = verify_rounding(P)
        rounding_gap.append((rr.rounded_perimeter - rr.perimeter) / rr.perimeter)
    for P in solids:
        r = verify_monotonicity(P, random_direction(rng, 3))
        steiner_gap.append((r.perimeter_after - r.perimeter_before)
                           / r.perimeter_before)
        vol_err.append(abs(r.volume_after / r.volume_before - 1))
        rr = verify_rounding(P)
        rounding_gap.append((rr.rounded_perimeter - rr.perimeter) / rr.perimeter)
    checks.append(_upper("steiner monotone", steiner_gap, 1e-9))
    checks.append(_upper("steiner volume", vol_err, 1e-10))
    checks.append(_upper("rounding monotone", rounding_gap, 1e-6))

    fam = CandidateFamily(upper=("hull", "offset", "components"),
                          lower=("shadow", "inscribed"), seed=seed)
    sandwich = []
    for P in stars[:3]:
        b = capacity_bracket(P, fam)
        sandwich.append((b.lower - b.upper) / b.upper)
    checks.append(_upper("bracket sandwich", sandwich, 1e-9))
    return VerifyReport(seed, count, checks)
