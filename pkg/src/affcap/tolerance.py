"""Global numeric tolerance record."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """One place for every numeric threshold used by the library.

    Attributes
    ----------
    abs, rel : float
        Generic absolute and relative comparison tolerances.
    unit : float
        Allowed deviation of a facet normal from unit length.
    closure : float
        Relative bound on ``|sum w_i nu_i| / sum w_i`` for a closed boundary.
    angle : float
        Directions closer than this (radians) are merged into one atom.
    degenerate : float
        ``min h / max h`` at or below this ratio counts as a vanishing support.
    merge : float
        Vertices closer than this (relative to the diameter) are merged.
    """

    abs: float = 1e-10
    rel: float = 1e-8
    unit: float = 1e-12
    closure: float = 1e-9
    angle: float = 1e-10
    degenerate: float = 1e-12
    merge: float = 1e-9


DEFAULT_TOL = Tolerances()
