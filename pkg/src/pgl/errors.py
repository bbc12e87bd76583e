"""Exception types shared across the package."""


class PglError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(PglError):
    """Vector/matrix shapes incompatible with the space dimensions involved."""


class ExponentMismatchError(PglError):
    """Operation mixing spaces with different exponents."""


class SizeCapError(PglError):
    """Input exceeds an enumeration or stage size cap."""


class ConditioningError(PglError):
    """Every admissible generator subset was rejected as ill-conditioned."""


class SpanError(PglError):
    """Generators do not span, or a subspace basis is degenerate."""


class CertificationError(PglError):
    """A required certificate could not be produced or failed."""


class CatalogTooCoarseError(PglError):
    """No catalog witness at the requested tolerance; carries the best defect."""

    def __init__(self, message: str, best_defect: float | None = None):
        super().__init__(message)
        self.best_defect = best_defect


class TowerError(PglError):
    """Malformed or insufficient tower input."""
