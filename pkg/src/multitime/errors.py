"""Exception types raised by the library."""


class MultitimeError(Exception):
    """Base class for all library errors."""


class ConvergenceGateViolation(MultitimeError):
    """Magnus series requested at or beyond its convergence radius (tau >= 1)."""


class StructureViolation(MultitimeError):
    """A Magnus term left the even-diagonal / odd-off-diagonal form."""


class GridRangeError(MultitimeError):
    pass


class ToleranceNotReached(MultitimeError):
    pass


class ParamMismatch(MultitimeError):
    pass


class ArityMismatch(MultitimeError):
    pass


class TruncationError(MultitimeError):
    """Fock-space truncation leaks too much population into the top levels."""


class NonHermitianInput(MultitimeError):
    pass
