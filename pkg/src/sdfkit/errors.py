"""Exception hierarchy.

Every error carries a stable ``code`` string and a process ``exit_status``
used by the command-line front end: 2 for bad input, 1 for a well-formed
problem whose answer is a domain failure (arbitrage, infeasibility, ...).
"""


class SdfError(Exception):
    code = "E_INTERNAL"
    exit_status = 1


class InputError(SdfError):
    code = "E_INPUT"
    exit_status = 2


class DomainError(SdfError):
    code = "E_DOMAIN"
    exit_status = 1


# -- market validation -------------------------------------------------------

class NonPositiveProbability(InputError):
    code = "E_NONPOSITIVE_PROBABILITY"


class ProbabilityNotNormalized(InputError):
    code = "E_PROBABILITY_NOT_NORMALIZED"


class NonPositiveBaseline(InputError):
    code = "E_NONPOSITIVE_BASELINE"


class DimensionMismatch(InputError):
    code = "E_DIMENSION_MISMATCH"


class SchemaError(InputError):
    """Malformed or unknown keys in an input file."""

    code = "E_SCHEMA"


# -- linear programming / FTAP ----------------------------------------------

class LpNumericalFailure(SdfError):
    code = "E_LP_NUMERICAL"


class Infeasible(DomainError):
    code = "E_INFEASIBLE"


class InternalInconsistency(SdfError):
    code = "E_INTERNAL_INCONSISTENCY"


# -- utility maximization ----------------------------------------------------

class DomainViolation(DomainError):
    """Wealth left the domain of the utility function."""

    code = "E_DOMAIN_VIOLATION"


class ArbitrageDetected(DomainError):
    code = "E_ARBITRAGE"

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class MaxIterationsExceeded(DomainError):
    code = "E_MAX_ITERATIONS"


class BaselineNotConstantRate(InputError):
    code = "E_BASELINE_NOT_CONSTANT_RATE"


# -- Ito models --------------------------------------------------------------

class SingularCovariation(InputError):
    code = "E_SINGULAR_COVARIATION"


class InvalidStepCount(InputError):
    code = "E_INVALID_STEPS"


class InvalidPathCount(InputError):
    code = "E_INVALID_PATHS"


class KappaNotInKernel(InputError):
    code = "E_KAPPA_NOT_IN_KERNEL"


class InsufficientPaths(InputError):
    code = "E_INSUFFICIENT_PATHS"


class IoFailure(SdfError):
    code = "E_IO"
    exit_status = 2
