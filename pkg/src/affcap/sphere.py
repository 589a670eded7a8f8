"""Integration over the unit sphere of negative powers of support functions.

In the plane a zonotope support ``h(t) = 1/2 sum w_i |cos(t - a_i)|`` is a
single cosine ``R cos(t - phi)`` between consecutive kinks, and
``(R cos(t - phi))^-2`` has the antiderivative ``tan(t - phi) / R^2``, so the
circle integral is evaluated in closed form.  For n >= 3 a product Gauss rule
is used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .errors import DivergenceError, DomainError
from .geometry import sphere_area
from .tolerance import DEFAULT_TOL

__all__ = ["QuadratureRule", "build_rule", "integrate_negative_power",
           "PiecewiseCosineProfile", "cosine_profile_from_atoms",
           "exact_2d_negative_square_integral", "DEFAULT_ORDER"]

DEFAULT_ORDER = 48


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes on S^{n-1} with positive weights summing to the sphere area."""

    dimension: int
    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f):
        return float(np.sum(self.weights * f(self.nodes)))

    def __len__(self):
        return len(self.weights)


def _half_sine_integral(k):
    # int_0^{pi/2} sin^k
    return 0.5 * math.exp(0.5 * math.log(math.pi) + gammaln((k + 1) / 2)
                          - gammaln(k / 2 + 1))


def _polar_nodes(per_half, power):
    """Gauss nodes in the polar angle on [0, pi/2] and [pi/2, pi].

    Weights include ``sin^power`` and are rescaled so that each half
    integrates ``sin^power`` exactly.
    """
    x, w = np.polynomial.legendre.leggauss(per_half)
    theta = np.concatenate([(x + 1) * np.pi / 4, (x + 3) * np.pi / 4])
    wt = np.concatenate([w, w]) * np.pi / 4 * np.sin(theta) ** power
    half = wt[:per_half].sum()
    wt *= _half_sine_integral(power) / half
    return theta, wt


def _circle_nodes(per_quadrant):
    x, w = np.polynomial.legendre.leggauss(per_quadrant)
    phi = np.concatenate([(x + 1 + 2 * q) * np.pi / 4 for q in range(4)])
    return phi, np.tile(w, 4) * np.pi / 4


@lru_cache(maxsize=32)
def _rule_arrays(n, order):
    k = max(order // 2, 2)
    phi, wphi = _circle_nodes(k)
    nodes = np.column_stack([np.cos(phi), np.sin(phi)])
    weights = wphi
    for dim in range(3, n + 1):
        theta, wt = _polar_nodes(k, dim - 2)
        c, s = np.cos(theta), np.sin(theta)
        nodes = np.concatenate(
            [np.column_stack([np.full(len(nodes), ci), si * nodes])
             for ci, si in zip(c, s)])
        weights = np.concatenate([wi * weights for wi in wt])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def build_rule(n, order=DEFAULT_ORDER):
    """Product Gauss rule on S^{n-1} for n >= 3.

    The polar angle of every recursion level is split at pi/2 and the
    azimuth into four quadrants, each carrying ``order // 2`` Gauss-Legendre
    nodes.  The rule is antipodally symmetric and has ``2 order^(n-1)``
    nodes for even ``order``.
    """
    if n < 3:
        raise DomainError("planar integrals use the exact arc integrator "
                          "(exact_2d_negative_square_integral)")
    if order < 4:
        raise DomainError("quadrature order must be at least 4")
    nodes, weights = _rule_arrays(int(n), int(order))
    return QuadratureRule(int(n), int(order), nodes, weights)


def integrate_negative_power(h, n, rule, *, tol=DEFAULT_TOL):
    """Quadrature of ``h(u)^-n`` over S^{n-1}.

    Parameters
    ----------
    h : callable
        Maps an ``(k, n)`` array of unit vectors to ``k`` support values.
    n : int
        Exponent and ambient dimension.
    rule : QuadratureRule

    Returns ``inf`` when ``h`` is positive but at most ``tol.degenerate``
    times its maximum somewhere; raises :class:`DivergenceError` when ``h``
    is zero or negative at a node.
    """
    if rule.dimension != n:
        raise DomainError("rule dimension does not match n")
    vals = np.asarray(h(rule.nodes), dtype=float)
    if np.any(vals <= 0):
        raise DivergenceError("support function vanishes on the sphere; "
                              "the origin is not interior to the body")
    if vals.min() <= tol.degenerate * vals.max():
        return math.inf
    return float(np.sum(rule.weights * vals ** (-float(n))))


@dataclass(frozen=True, eq=False)
class PiecewiseCosineProfile:
    """Circle function equal to ``amplitude[k] cos(t - phase[k])`` on arc k.

    Arc k runs from ``start[k]`` to ``end[k]``; the last arc wraps through
    2 pi so the arcs cover the circle exactly once.
    """

    start: np.ndarray
    end: np.ndarray
    amplitude: np.ndarray
    phase: np.ndarray

    def __len__(self):
        return len(self.start)

    @property
    def knots(self):
        """Values at the arc starts; the minimum of ``h`` is attained there."""
        return self.amplitude * np.cos(self.start - self.phase)

    @property
    def degenerate(self):
        k = self.knots
        return bool(k.min() <= DEFAULT_TOL.degenerate * np.abs(k).max())

    def __call__(self, theta):
        t = np.mod(np.asarray(theta, dtype=float), 2 * np.pi)
        idx = np.searchsorted(self.start, t, side="right") - 1
        idx = np.where(idx < 0, len(self.start) - 1, idx)
        return self.amplitude[idx] * np.cos(t - self.phase[idx])

    def scaled(self, r):
        return PiecewiseCosineProfile(self.start, self.end,
                                      self.amplitude * r, self.phase)


def _fold(directions, weights, tol):
    """Merge antipodal atoms: |cos(t - a)| only depends on a mod pi."""
    alpha = np.mod(np.arctan2(directions[:, 1], directions[:, 0]), np.pi)
    order = np.argsort(alpha)
    alpha, weights = alpha[order], weights[order]
    # pi - tiny and 0 are the same axis
    wrap = alpha > np.pi - tol
    alpha = np.where(wrap, alpha - np.pi, alpha)
    order = np.argsort(alpha, kind="stable")
    alpha, weights = alpha[order], weights[order]
    new = np.concatenate([[True], np.diff(alpha) > tol])
    group = np.cumsum(new) - 1
    w = np.bincount(group, weights=weights)
    # weight-averaged angle inside each merged group
    a = np.bincount(group, weights=weights * alpha) / w
    return a, w


def cosine_profile_from_atoms(S, *, tol=DEFAULT_TOL):
    """Support of the planar projection body as a piecewise cosine profile.

    ``h(t) = 1/2 sum_i w_i |cos(t - a_i)|``.  Kinks sit at ``a_i +- pi/2``;
    on each arc between kinks the signs are fixed and the sum collapses to
    ``a cos t + b sin t``.
    """
    if S.dimension != 2:
        raise DomainError("cosine profiles are planar")
    return profile_from_axes(*_fold(np.asarray(S.directions),
                                    np.asarray(S.weights, float), tol.angle))


def profile_from_axes(beta, w):
    """Profile of ``1/2 sum w_i |cos(t - beta_i)|`` with ``beta_i`` in [0, pi)."""
    m = len(beta)
    if m == 0:
        raise DomainError("no atoms")
    bp = np.concatenate([beta + np.pi / 2, beta + 1.5 * np.pi]) % (2 * np.pi)
    owner = np.concatenate([np.arange(m), np.arange(m)])
    # crossing beta + pi/2 turns cos(t - beta) negative, beta + 3pi/2 positive
    sign_after = np.concatenate([-np.ones(m), np.ones(m)])
    order = np.argsort(bp, kind="stable")
    bp, owner, sign_after = bp[order], owner[order], sign_after[order]
    start = bp
    end = np.concatenate([bp[1:], [bp[0] + 2 * np.pi]])
    mid0 = 0.5 * (start[0] + end[0])
    s0 = np.sign(np.cos(mid0 - beta))
    ca, sb = w * np.cos(beta), w * np.sin(beta)
    a0 = 0.5 * float(np.sum(s0 * ca))
    b0 = 0.5 * float(np.sum(s0 * sb))
    # arc k >= 1 begins after crossing breakpoint k
    da = sign_after[1:] * ca[owner[1:]]
    db = sign_after[1:] * sb[owner[1:]]
    a = np.concatenate([[a0], a0 + np.cumsum(da)])
    b = np.concatenate([[b0], b0 + np.cumsum(db)])
    return PiecewiseCosineProfile(start, end, np.hypot(a, b), np.arctan2(b, a))


def exact_2d_negative_square_integral(profile):
    """Closed-form ``int_0^{2pi} h(t)^-2 dt`` for a positive cosine profile."""
    if profile.degenerate:
        raise DivergenceError("profile touches zero; the integral diverges")
    s = profile.start - profile.phase
    e = profile.end - profile.phase
    # tan(e) - tan(s) written without cancellation
    terms = np.sin(profile.end - profile.start) / (np.cos(e) * np.cos(s))
    return float(np.sum(terms / profile.amplitude ** 2))


def sphere_measure(n):
    return sphere_area(n)
