"""Exception types shared across the package."""


class QuadmapError(Exception):
    """Base class for package errors."""


class InvalidConstants(QuadmapError, ValueError):
    """Region constants violate one of the inequalities they must satisfy."""

    def __init__(self, message: str, inequality: str | None = None):
        super().__init__(message)
        self.inequality = inequality


class NoFeasibleEpsilon(InvalidConstants):
    """No epsilon in the search grid satisfies the trap inequalities."""


class IndeterminacyHit(QuadmapError, ArithmeticError):
    """The homogeneous lift mapped a point to the zero vector."""


class NotApplicable(QuadmapError):
    """A check was requested for parameters where it has no content."""
