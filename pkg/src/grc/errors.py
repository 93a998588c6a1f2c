"""Exception hierarchy shared by all modules."""


class GRCError(Exception):
    """Base class for every error raised by this package."""


class InvalidDistributionError(GRCError, ValueError):
    pass


class SpaceMismatchError(GRCError, ValueError):
    pass


class InvalidOperationError(GRCError, ValueError):
    pass


class NondeterministicOperationError(GRCError, ValueError):
    """Raised when an operation that must be deterministic is not."""


class UnsupportedClassificationError(NondeterministicOperationError):
    """Entropy-ejection classification of a nondeterministic operation."""


class NoWitnessError(GRCError, ValueError):
    pass


class PreconditionError(GRCError, ValueError):
    pass


class EnumerationCapError(GRCError):
    def __init__(self, count: int, limit: int):
        super().__init__(f"{count} maximal preconditions exceed the enumeration limit {limit}")
        self.count = count
        self.limit = limit


class SpaceTooLargeError(GRCError):
    pass


class GateSpecError(GRCError, ValueError):
    pass


class SimulationError(GRCError):
    code = "S000"


class DriveFightError(SimulationError):
    code = "S001"


class EncodingError(SimulationError):
    code = "S002"


class ScheduleError(SimulationError):
    code = "S003"
