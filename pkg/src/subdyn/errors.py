"""Exception hierarchy. Each class maps onto one CLI exit code."""


class SubdynError(Exception):
    exit_code = 1


class ConfigError(SubdynError):
    """Invalid or unreadable configuration."""

    exit_code = 2

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class ConvergenceError(SubdynError):
    """A quadrature, root search or extrapolation did not converge."""

    exit_code = 3

    def __init__(self, message, estimate=None, last=None):
        super().__init__(message)
        self.estimate = estimate
        self.last = last


class NearPoleError(SubdynError):
    exit_code = 3


class SingularError(SubdynError):
    exit_code = 3


class ResourceError(SubdynError):
    exit_code = 3

    def __init__(self, message, dimension=None):
        super().__init__(message)
        self.dimension = dimension


class ConsistencyError(SubdynError):
    """An identity that must hold by construction was violated."""

    exit_code = 4


class ContractViolation(SubdynError, ValueError):
    exit_code = 2
