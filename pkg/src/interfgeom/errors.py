"""Exception types raised across the package."""


class InterfGeomError(Exception):
    """Base class for all errors raised by interfgeom."""


class NotHermitian(InterfGeomError, ValueError):
    pass


class InvalidState(InterfGeomError, ValueError):
    """Matrix is not a density matrix (Hermitian, PSD, unit trace)."""


class AmbiguousClustering(InterfGeomError, ValueError):
    """An eigenvalue gap sits too close to the degeneracy threshold to classify."""


class TypeMismatch(InterfGeomError, ValueError):
    """Two states or bundle points do not share the same type."""


class NotTangent(InterfGeomError, ValueError):
    pass


class TypeChanged(InterfGeomError, ValueError):
    """The type of a curve of states changes across a finite-difference stencil."""


class StepTooLarge(InterfGeomError, ValueError):
    """Eigenvalue blocks cannot be matched across a finite-difference stencil."""


class MetricDiagnosticsError(InterfGeomError, ArithmeticError):
    pass


class InvalidSetup(InterfGeomError, ValueError):
    pass


class GaplessPoint(InterfGeomError, ArithmeticError):
    """The Bloch vector vanishes (or is below the gap tolerance) at a momentum."""


class GaplessParameter(InterfGeomError, ArithmeticError):
    """The band structure is gapless somewhere on the momentum grid."""


class ConfigError(InterfGeomError, ValueError):
    pass
