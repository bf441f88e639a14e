"""Exception types shared across the package."""


class DivsumError(Exception):
    """Base class for all package-specific errors."""


class InvalidInputError(DivsumError):
    """Input violates a documented precondition (shape, finiteness, range)."""


class SingularOracleError(DivsumError):
    """A closed-form reference value does not exist (singular solve)."""


class NumericalFailureError(DivsumError):
    """An iterative kernel failed to converge within its internal budget."""


class SingularSylvesterError(DivsumError):
    """Sylvester solve hit (near) coincident spectra.

    Carries the offending eigenvalue pair in ``args[1]`` when available.
    """


class InvalidWeightsError(DivsumError):
    """A weight sequence failed its positivity / ordering requirements."""


class NotSummableError(DivsumError):
    """A damped series showed no usable decay within the term budget."""


class DivergentIntegralError(DivsumError):
    """The Borel-type integrand outgrew the exponential weight."""


class DegeneratePadeError(DivsumError):
    """The rational-coefficient linear system is numerically singular."""


class PoleError(DivsumError):
    """The rational approximant denominator is singular at the argument."""


class SieveRangeError(DivsumError):
    """An arithmetic-function lookup exceeded the precomputed sieve bound."""


class SchemaError(DivsumError):
    """A CSV/JSON payload does not match the published schema."""
