"""Exception hierarchy shared by every windsmc module."""


class WindSmcError(Exception):
    """Base class for all errors raised by windsmc."""


class DomainError(WindSmcError, ValueError):
    """An argument lies outside the domain of a model function."""


class SingularityError(DomainError):
    """The power-coefficient auxiliary ratio has a vanishing denominator."""


class ConfigError(WindSmcError, ValueError):
    """Invalid scenario or command configuration."""


class IngestionError(WindSmcError, ValueError):
    """A wind CSV file could not be parsed into a valid profile."""


class IntegrationError(WindSmcError, RuntimeError):
    """The closed-loop state became non-finite."""


class MonitorError(WindSmcError, RuntimeError):
    """A runtime monitor aborted the simulation.

    ``monitor`` names the monitor and ``step`` the step index at which it fired.
    """

    def __init__(self, monitor, step, detail=""):
        self.monitor = monitor
        self.step = step
        msg = f"monitor '{monitor}' aborted at step {step}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class ComparisonError(WindSmcError, ValueError):
    """Two scenarios cannot be compared because their environments differ."""
