"""Exception types raised across the package."""


class EntroflowError(Exception):
    """Base class for all package errors."""


class DegenerateElement(EntroflowError, ArithmeticError):
    """An edge length, triangle area or mixed area underflowed the tolerance."""


class InvalidSurface(EntroflowError, ValueError):
    """A surface violates its structural invariants."""


class DimensionMismatch(EntroflowError, ValueError):
    pass


class RemeshFailure(EntroflowError):
    pass


class NonpositiveScale(EntroflowError, ValueError):
    pass


class OptimizerDiverged(EntroflowError, ArithmeticError):
    pass


class UnsupportedIndex(EntroflowError, ValueError):
    pass


class SolveFailure(EntroflowError, ArithmeticError):
    pass


class OutOfRange(EntroflowError, ValueError):
    pass


class InsufficientSamples(EntroflowError, ValueError):
    pass
