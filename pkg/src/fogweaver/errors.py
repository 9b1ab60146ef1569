"""Exception types shared across the toolchain."""


class FogweaverError(Exception):
    """Base class for all fogweaver errors."""


class ScenarioSyntaxError(FogweaverError):
    """Malformed scenario text. Carries the 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class DuplicateIdentifierError(FogweaverError):
    """An identifier was declared more than once."""


class UnknownReferenceError(FogweaverError):
    """A declaration refers to an entity that was never declared."""


class EmptyInputError(FogweaverError):
    """An operation that needs at least one element got none."""


class NoSuchLinkError(FogweaverError):
    """A route names two adjacent entities with no declared link between them."""


class StreamNotScheduledError(FogweaverError):
    """Metrics were requested for a stream absent from the schedule."""


class MismatchedStreamsError(FogweaverError):
    """Two per-stream maps that must cover the same streams do not."""


class InfeasibleError(FogweaverError):
    """A synthesis step could not place every stream or task.

    ``unplaced`` names the items that could not be accommodated.
    """

    def __init__(self, message: str, unplaced=()):
        super().__init__(message)
        self.unplaced = tuple(unplaced)


class TaskPlacementInfeasibleError(InfeasibleError):
    """A node cannot absorb additional (security) tasks."""
