"""
Exception hierarchy shared by the numerical modules.
"""


class OHLabError(Exception):
    """Base class for all errors raised by the lab."""


class DomainError(OHLabError, ValueError):
    """An argument lies outside the domain of the operation."""


class PoleError(DomainError):
    """Evaluation too close to a pole or a branch point."""


class DegenerateInputError(DomainError):
    """Input for which the problem is trivially or non-uniquely solved."""


class ConvergenceError(OHLabError, RuntimeError):
    """An iterative scheme did not reach its tolerance."""


class BracketError(ConvergenceError):
    """No sign change was found while bracketing a root."""


class PeriodProblemError(OHLabError, ValueError):
    """Surface parameters that do not solve the period problem."""
