"""Exception hierarchy shared by all modules."""


class AffcapError(Exception):
    """Base class for library errors."""


class DomainError(AffcapError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class DegeneracyError(AffcapError, ValueError):
    """Input points are affinely dependent."""

    def __init__(self, message, rank):
        super().__init__(message)
        self.rank = rank


class InvalidPolytopeError(AffcapError, ValueError):
    """Facet data does not describe a closed polyhedral boundary."""


class SingularMapError(AffcapError, ValueError):
    """A linear map that must be invertible is singular."""


class ConvexityError(AffcapError, ValueError):
    """A convex input was required."""


class DivergenceError(AffcapError, ArithmeticError):
    """A support function vanishes on the sphere, so the polar volume diverges."""


class ConfigError(AffcapError, ValueError):
    """A search configuration cannot be evaluated."""
