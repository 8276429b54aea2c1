"""Exception types raised across the compiler."""


class QcflowError(Exception):
    """Base class for all qcflow errors."""


class InvalidCommand(QcflowError, ValueError):
    pass


class NonInvertibleGate(QcflowError):
    pass


class TooWide(QcflowError):
    pass


class CompositeHasNoMatrix(QcflowError):
    pass


class DeadQubitUse(QcflowError):
    pass


class NonInvertibleInCompute(QcflowError):
    pass


class DoubleUncompute(QcflowError):
    pass


class ControlTargetsOverlap(QcflowError):
    pass


class NoRuleApplicable(QcflowError):
    pass


class ConstantOutOfRange(QcflowError, ValueError):
    pass


class NotCoprime(QcflowError, ValueError):
    pass


class NotRegular(QcflowError, ValueError):
    pass


class CircuitTooWide(QcflowError):
    pass


class UnsimulableGate(QcflowError):
    pass


class InvalidN(QcflowError, ValueError):
    pass


class ParseError(QcflowError):
    """Malformed circuit file. Carries the 1-based line and column."""

    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{msg} (line {line}, column {col})")
        self.line = line
        self.col = col


class TooManyQubits(CircuitTooWide):
    """More qubits than positions on the hardware graph."""
