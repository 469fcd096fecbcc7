"""Exception hierarchy shared by every module."""


class PlanningError(Exception):
    """Base class for all errors raised by paretoplan."""


class InvalidQueryError(PlanningError, ValueError):
    """A cell query was out of bounds or landed on an occupied cell."""


class InvalidStepError(PlanningError, ValueError):
    """Two cells do not form a legal 8-connected move."""


class ConfigError(PlanningError, ValueError):
    pass


class GenerationError(PlanningError):
    """No connected workspace could be generated within the attempt budget."""


class IngestionError(PlanningError, ValueError):
    """A terrain or workspace file could not be parsed."""


class NoPathError(PlanningError):
    """The goal cannot be reached from the query cell."""


class BudgetExceededError(PlanningError):
    """The search exceeded its expansion budget."""


class CorruptStateError(PlanningError):
    """A back-pointer field contains a cycle or a dangling pointer."""
