"""Exception types shared across the package."""


class SphereLPError(Exception):
    """Base class for all package-specific errors."""


class NotPositiveDefinite(SphereLPError):
    """A Gram matrix failed a positive-definiteness check."""


class SingularBasis(SphereLPError):
    """A basis matrix is (numerically) singular."""


class BudgetExceeded(SphereLPError):
    """Lattice enumeration exceeded its node budget."""


class InvalidWeight(SphereLPError):
    """Eisenstein series requested at an unsupported weight."""


class DivideByZeroSeries(SphereLPError):
    """Division by a series that is zero to its known order."""


class OrderUnderflow(SphereLPError):
    """A series operation left no valid coefficients."""


class TailTooLarge(SphereLPError):
    """Series evaluation cannot meet the requested precision."""


class CancellationFailure(SphereLPError):
    """Expected symbolic cancellation in an integrand expansion did not occur."""


class PoleResidue(SphereLPError):
    """A tail-integral pole is not cancelled by the sine-squared prefactor."""


class OracleDiverged(SphereLPError):
    """The radial-transform quadrature failed its Gaussian self-check."""


class NumericalStall(SphereLPError):
    """The simplex solver hit its iteration cap."""


class InvalidCertificate(SphereLPError):
    """A bound certificate has violated sign margins."""


class ChecksNotRun(SphereLPError):
    """A certificate was requested before its prerequisite checks."""


class ConfigError(SphereLPError):
    """Invalid job configuration."""
