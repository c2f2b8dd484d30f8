"""Exception hierarchy shared by all bdnklab modules."""


class BdnkError(Exception):
    """Base class for all bdnklab errors."""


class DomainError(BdnkError):
    """Energy density outside the admissible domain (vacuum or negative)."""


class NormalizationError(BdnkError):
    """Four-velocity fails the unit-timelike normalization."""


class DegenerateStateError(BdnkError):
    """Enthalpy density eps + P is not positive."""


class StencilError(BdnkError):
    """Field patch too small for the requested finite-difference order."""


class CoefficientError(BdnkError):
    """Transport coefficients outside the range a formula requires."""


class SingularSampleError(BdnkError):
    """Both sides of a determinant comparison numerically vanish."""


class DegenerateDirectionError(BdnkError):
    """Characteristic-speed denominator vanishes for this direction pair."""


class NonCausalInputError(BdnkError):
    """Root discriminant negative; inputs violate the causal range."""


class DegenerateSpectrumError(BdnkError):
    """Squared characteristic speeds collide; multiplicity pattern differs."""


class PreconditionError(BdnkError):
    """Inputs violate a documented algebraic precondition."""


class SingularPrincipalError(BdnkError):
    """Pointwise 5x5 principal solve is singular or badly conditioned."""


class FloorError(BdnkError):
    """Energy density dropped below the configured floor."""


class CFLError(BdnkError):
    """Requested time step violates the CFL bound."""


class BlowupError(BdnkError):
    """A field magnitude exceeded the configured cap."""


class ConfigError(BdnkError):
    """Run configuration failed validation."""
