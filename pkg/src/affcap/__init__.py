"""Affine perimeter, affine BV-capacity, Steiner symmetrization and affine
Cheeger constants of polyhedral sets."""

from .errors import *  # noqa: F401,F403
from .tolerance import DEFAULT_TOL, Tolerances
from .geometry import *  # noqa: F401,F403
from .sphere import *  # noqa: F401,F403
from .functionals import *  # noqa: F401,F403
from .symmetrize import *  # noqa: F401,F403
from .capacity import *  # noqa: F401,F403
from .cheeger import *  # noqa: F401,F403

__version__ = "0.1.0"
