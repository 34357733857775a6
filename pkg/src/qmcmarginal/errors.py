"""Exception hierarchy shared by all modules."""


class MarginalError(Exception):
    """Base class for errors raised by qmcmarginal."""


class ArgumentError(MarginalError, ValueError):
    """Invalid argument to a constructor or operation."""


class CapacityError(MarginalError):
    """Requested point set exceeds the memory budget."""


class EvaluationError(MarginalError):
    """Target function returned a non-finite value."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class EmptyPartitionError(MarginalError):
    """A partition bin contains no projected points."""

    def __init__(self, message, bin_index=None):
        super().__init__(message)
        self.bin_index = bin_index


class AlgorithmChoiceError(MarginalError):
    """Algorithm I was requested on a fully projection regular axis."""
