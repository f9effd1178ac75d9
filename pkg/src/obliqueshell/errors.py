"""Exception hierarchy shared by all modules."""


class ObliqueShellError(Exception):
    """Base class for all library errors."""


class ParameterError(ObliqueShellError):
    """Invalid user-supplied parameter (bad N, tolerance, curve config, ...)."""


class DomainError(ObliqueShellError):
    """Argument outside the mathematical domain of an operation."""


class SingularityError(ObliqueShellError):
    """Kernel evaluated at its singular point, or field point on the curve."""


class ResolutionError(ObliqueShellError):
    """Requested spectral data exceeds what the discretization can resolve."""


class NumericalInstabilityError(ObliqueShellError):
    """An extrapolation or iteration failed its internal convergence check."""


class PoleProximityError(ObliqueShellError):
    """Resolvent requested too close to an eigenvalue; names the culprit."""


class ConfigurationError(ObliqueShellError):
    """Inconsistent grid/box configuration (e.g. volume grid touching the curve)."""


class DivergenceError(ObliqueShellError):
    """Root bracketing expanded past its safety limit."""
