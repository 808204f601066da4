__all__ = [
    "OptitestError", "ConfigError", "IntegrationError", "ContractViolation",
    "InvariantViolation", "IllPosedError", "SolverError", "InfeasibleError",
    "ConvergenceError", "SingularIntegrandError",
]


class OptitestError(Exception):
    """Base class of every domain failure raised by optitest."""


class ConfigError(OptitestError):
    """Invalid scenario configuration.

    Attributes
    ----------
    section : str or None
        Offending section.
    key : str or None
        Offending key.
    lineno : int or None
        Line of the offending entry in the configuration file, if known.
    """
    def __init__(self, message, *, section=None, key=None, lineno=None):
        if lineno is not None:
            message = "line {}: {}".format(lineno, message)
        super().__init__(message)
        self.section = section
        self.key     = key
        self.lineno  = lineno


class IntegrationError(OptitestError):
    """A compartment left the simplex by more than the integrator tolerance."""


class ContractViolation(OptitestError):
    """An estimator invariant could not be maintained."""


class InvariantViolation(OptitestError):
    """A run monitor fired."""


class IllPosedError(OptitestError):
    """A reconstruction was requested where its denominator vanishes."""


class SolverError(OptitestError):
    """Base class of policy solver failures."""


class InfeasibleError(SolverError):
    """No policy of the requested class satisfies the constraint."""


class ConvergenceError(SolverError):
    """Newton iteration failed from every seed.

    Attributes
    ----------
    diagnostics : list of tuple
        One ``(seed, reason)`` pair per attempted seed.
    """
    def __init__(self, message, diagnostics=()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)


class SingularIntegrandError(SolverError, ValueError):
    """The orbit integrand vanishes inside the integration range."""
