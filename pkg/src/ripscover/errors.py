"""Exception types shared across the package."""


class RipsCoverError(Exception):
    """Base class for all package errors."""


class DimensionError(RipsCoverError, ValueError):
    """Coordinate vectors or complexes have incompatible dimensions."""


class CoverageError(RipsCoverError, ValueError):
    """A cover leaves a point uncovered or contains an empty set."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class IntegrityError(RipsCoverError):
    """A filtered complex is not downward closed or not monotone."""


class AcyclicityViolation(RipsCoverError):
    """A boundary equation has no solution inside a carrier."""

    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell


class ResourceCapError(RipsCoverError):
    """A computation would exceed a configured size limit."""

    def __init__(self, message, counts=None):
        super().__init__(message)
        self.counts = counts or {}
