class SteinerError(Exception):
    """Base class for all errors raised by steinertd."""


class InfeasibleError(SteinerError):
    """The requested vertices do not lie in one connected component."""


class StpSyntaxError(SteinerError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CapacityError(SteinerError):
    """A request exceeds a configured size limit (terminal cap, index l)."""


class IndexInvariantError(SteinerError):
    """A sub-tree needed during recombination is missing: an index bug, not bad input."""


class DecompositionError(SteinerError):
    pass


class IndexFormatError(SteinerError, ValueError):
    pass


class GraphHashMismatch(IndexFormatError):
    def __init__(self, expected, actual):
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"index was built for graph {expected} but the supplied graph hashes to {actual}")
