"""Exception hierarchy shared across the package.

Two base classes matter for the CLI exit-code contract: ``DomainError``
(bad mathematical input, exit code 2) and ``NumericalError`` (a computation
failed to meet its tolerance, exit code 3).
"""


class QcatError(Exception):
    """Base class for all package errors."""

    code = "Error"


class DomainError(QcatError):
    """Input is outside the mathematical domain of an operation."""

    code = "DomainError"


class NumericalError(QcatError):
    """A numerical routine failed to reach its required tolerance."""

    code = "NumericalError"


class NotUnimodular(DomainError):
    code = "NotUnimodular"


class NotHyperbolic(DomainError):
    code = "NotHyperbolic"


class InadmissiblePair(DomainError):
    """No certified propagator exists for this (N, theta, A) combination."""

    code = "InadmissiblePair"


class NotNormalized(DomainError):
    code = "NotNormalized"


class ConvergenceFailure(NumericalError):
    code = "ConvergenceFailure"


class PeriodNotFound(DomainError):
    """No scalar power of the propagator up to the requested bound."""

    code = "PeriodNotFound"


class PeriodNotScalar(DomainError):
    code = "PeriodNotScalar"


class DegenerateProjection(NumericalError):
    """Time-averaging annihilated the seed state on this eigenphase branch."""

    code = "DegenerateProjection"


class DegenerateState(NumericalError):
    code = "DegenerateState"


class BadAlphabet(DomainError):
    code = "BadAlphabet"


class DimensionMismatch(DomainError):
    code = "DimensionMismatch"


class InsufficientData(DomainError):
    code = "InsufficientData"


class IoFailure(QcatError):
    code = "IoFailure"
