"""Exception hierarchy for the whole pipeline.

``ValidationError`` and its subclasses mean the caller handed us bad data or
configuration; the CLI maps them to exit code 1. Anything else escaping the
library is treated as a runtime failure (exit code 2).
"""


class PprlinkError(Exception):
    """Base class for all library errors."""


class ValidationError(PprlinkError, ValueError):
    """Invalid input data or configuration."""


# graph ingestion
class UnknownNodeType(ValidationError):
    pass


class DrugDrugEdge(ValidationError):
    pass


class SelfLoop(ValidationError):
    pass


class EmptyInput(ValidationError):
    pass


class ConflictingNodeType(ValidationError):
    """Same node id appears with two different types."""


class DimensionMismatch(ValidationError):
    pass


# target pair validation
class UnknownDrug(ValidationError):
    pass


class NonDrugNodeInPair(ValidationError):
    pass


class ConflictingDuplicateLabel(ValidationError):
    """Same unordered drug pair listed with both labels."""


# embedding / features
class EmptyMatrix(ValidationError):
    pass


class EmptyTargets(ValidationError):
    pass


# learning
class DegenerateSplit(ValidationError):
    pass


class SingleClassTraining(ValidationError):
    pass


class WidthMismatch(ValidationError):
    pass


# metrics
class SingleClass(ValidationError):
    pass


class NoPositives(ValidationError):
    pass


class StageError(PprlinkError):
    """A pipeline stage failed; carries the stage name for error reporting."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
