"""Exception types shared across the engine."""

from __future__ import annotations

from typing import Optional


class DisruptkitError(Exception):
    pass


class StaleEvent(DisruptkitError):
    """Event index or time does not follow the state."""


class UnknownParticipant(DisruptkitError):
    pass


class UnknownItem(DisruptkitError):
    pass


class IllegalTransition(DisruptkitError):
    """A move the functional process does not allow from its current phase."""

    def __init__(self, phase, act) -> None:
        self.phase = phase
        self.act = act
        super().__init__(f"illegal in phase {phase.name.lower()}: {act}")


class ParseError(DisruptkitError):
    def __init__(self, message: str, line: int = 0, column: int = 0, expected: Optional[str] = None):
        self.line = line
        self.column = column
        self.expected = expected
        self.message = message
        loc = f"{line}:{column}: " if line else ""
        exp = f" (expected {expected})" if expected else ""
        super().__init__(f"{loc}{message}{exp}")


class SchemaError(ParseError):
    def __init__(self, key: str, message: str, line: int = 0, column: int = 0):
        self.key = key
        super().__init__(message, line, column)


class MissingSlot(DisruptkitError):
    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"template slot {{{name}}} has no value")


class NoTemplate(DisruptkitError):
    pass


class PreconditionError(DisruptkitError):
    pass


class UnsatisfiableMustForm(DisruptkitError):
    """Every candidate of a must-form step forecasts a necessary disruption.

    The planner records this in the plan rationale rather than raising it.
    """


class UnknownOccasion(DisruptkitError):
    pass
