"""Exception hierarchy."""


class TwistWoldError(Exception):
    """Base class for every error raised by the package."""


class DimensionError(TwistWoldError, ValueError):
    """Operands live in incompatible spaces."""


class ContainmentError(TwistWoldError, ValueError):
    """A subspace was expected to sit inside another and does not."""


class NotAContractionError(TwistWoldError, ValueError):
    pass


class NotAnIsometryError(TwistWoldError, ValueError):
    pass


class PreconditionError(TwistWoldError, ValueError):
    """An operator class precondition failed; ``power`` names the first bad power."""

    def __init__(self, message, power=None):
        super().__init__(message)
        self.power = power


class VerificationError(TwistWoldError):
    """A tuple failed its defining relations in strict mode."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ReductionError(TwistWoldError):
    """A computed slice stopped reducing one of the operators."""

    def __init__(self, message, label=None, index=None, residual=None):
        super().__init__(message)
        self.label = label
        self.index = index
        self.residual = residual


class InadmissibleIndexError(TwistWoldError, ValueError):
    """A lattice index lies outside the admissible set."""


class WindowError(TwistWoldError, ValueError):
    pass


class ParseError(TwistWoldError, ValueError):
    """Tuple file could not be parsed; ``position`` locates the problem."""

    def __init__(self, message, position=None):
        loc = f" at {position}" if position else ""
        super().__init__(f"{message}{loc}")
        self.position = position
