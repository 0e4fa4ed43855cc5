"""Exception hierarchy.

Three families, mirroring the CLI exit codes: ``SpecError`` (bad input,
exit 2), ``MathError`` (a mathematical precondition failed, exit 3) and
``NumericError`` (floating-point evaluation or integration failed).
"""


class SlowmaniError(Exception):
    """Base class for every error raised by this package."""


class SpecError(SlowmaniError):
    """The problem definition is malformed."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class LexError(SpecError):
    pass


class ParseError(SpecError):
    pass


class MissingSection(SpecError):
    pass


class DimensionMismatch(SpecError):
    pass


class UnknownSymbol(SpecError, KeyError):
    def __str__(self):
        return SpecError.__str__(self)


class MathError(SlowmaniError):
    pass


class DivisionByZero(MathError, ZeroDivisionError):
    pass


class SeriesDivisionByZero(DivisionByZero):
    pass


class SingularMatrix(MathError):
    pass


class ShapeMismatch(MathError, ValueError):
    pass


class DegreeOverflow(MathError):
    """An intermediate polynomial exceeded ``SLOWMANI_MAX_DEGREE``."""


class NotCriticalManifold(MathError):
    pass


class FrameNotInvariant(MathError):
    pass


class InternalInconsistency(MathError, AssertionError):
    pass


class DegenerateLevel(MathError):
    pass


class NotCriticalSubmanifold(MathError):
    pass


class NumericError(SlowmaniError):
    pass


class EvaluationError(NumericError):
    pass


class DivergedTrajectory(NumericError):
    def __init__(self, message, step=None):
        self.step = step
        super().__init__(message)


class NumericalFailure(NumericError):
    pass
