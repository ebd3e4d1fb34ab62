"""Exception hierarchy.

Two families matter to callers: ``ParameterError`` (bad inputs or a
configuration that cannot run, CLI exit code 2) and ``NumericalError``
(the pipeline ran but could not certify a result, CLI exit code 3).
"""


class Pv5LabError(Exception):
    """Base class for all package errors."""


class ParameterError(Pv5LabError, ValueError):
    """Invalid parameters or run configuration."""


class AlphaOutOfRange(ParameterError):
    """Exponent of the (1-z^2) factor outside the supported range."""


class K2OutOfRange(ParameterError):
    """Singularity parameter k^2 >= 1 (poles would leave [-1, 1])."""


class NegativeT(ParameterError):
    """Deformation time t < 0."""


class SingularParams(ParameterError):
    """k^2 = 0 requested for a quantity that carries 1/k^2 factors."""


class LadderIneligible(ParameterError):
    """Ladder quantities requested for parameters where they diverge."""


class DomainError(Pv5LabError, ValueError):
    """Evaluation point outside [-1, 1]."""


class PoleError(Pv5LabError, ArithmeticError):
    """Evaluation too close to a pole of v'(z)."""


class NumericalError(Pv5LabError, ArithmeticError):
    """Computation ran but did not reach a certified result."""


class NoConvergence(NumericalError):
    """Quadrature error estimate above tolerance at the refinement cap."""

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class PrecisionExhausted(NumericalError):
    """A norm lost all significant digits at the working precision."""


class StepUnderflow(NumericalError):
    """Adaptive ODE step shrank below the representable floor."""


class PoleHit(NumericalError):
    """ODE trajectory approached a singular value of the right-hand side."""
