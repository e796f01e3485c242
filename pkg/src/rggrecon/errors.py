"""Exception families shared across the package.

Each family maps to a distinct CLI exit code (see cli.EXIT_CODES).
"""


class RGGReconError(Exception):
    """Base class for all package errors."""


class ParameterError(RGGReconError, ValueError):
    """Invalid parameter or configuration value."""


class GeometryDomainError(RGGReconError, ValueError):
    """Argument outside the mathematical domain of a geometry kernel."""


class DeepRequired(RGGReconError):
    """Estimator invoked on a vertex that is not deep."""


class WrongRange(RGGReconError):
    """Pair is at the wrong graph distance for the requested estimator."""


class NoPath(RGGReconError):
    """No admissible path/intermediate exists between the two vertices."""


class TriangleInequalityViolated(RGGReconError):
    """Landmark distances do not form a strict triangle/simplex."""


class SingularGeometry(RGGReconError):
    """Landmark configuration is rank-deficient (e.g. collinear)."""


class DegenerateProjection(RGGReconError):
    """Spherical projection collapsed to a near-zero vector."""


class LandmarkSearchFailed(RGGReconError):
    """No admissible landmark tuple found, even after window relaxation."""


class CornerSearchFailed(RGGReconError):
    """Fewer well-separated low-degree corner candidates than required."""


class FormatError(RGGReconError, ValueError):
    """Malformed or strictly-invalid input file."""


class BudgetExceeded(RGGReconError):
    """Sweep cell rejected by the memory/edge budget guard."""
