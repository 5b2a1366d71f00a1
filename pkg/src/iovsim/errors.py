"""Exception types shared across the simulator."""


class SimulationError(Exception):
    """Base class for simulator errors."""


class NoActivePmError(SimulationError):
    """An operation required at least one powered-on PM."""


class NoPathError(SimulationError):
    """No route exists between the requested topology nodes."""


class NothingToDoError(SimulationError):
    """A consolidation step had fewer than two powered-on PMs."""


class EmptyRunError(SimulationError):
    """A summary was requested for an empty record stream."""


class MismatchedScenariosError(SimulationError):
    """Two summaries do not describe comparable runs."""


class ConfigParseError(SimulationError):
    """Configuration file is not syntactically valid."""

    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class ConfigValidationError(SimulationError):
    """Configuration violates a field constraint."""

    def __init__(self, field, constraint):
        self.field = field
        self.constraint = constraint
        super().__init__(f"{field}: {constraint}")
