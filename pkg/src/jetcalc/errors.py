"""Exception hierarchy shared by all jetcalc modules."""


class JetCalcError(Exception):
    """Base class for all jetcalc errors."""


class DimensionError(JetCalcError, ValueError):
    """Multi-index length or variable index incompatible with the context."""


class ParseError(JetCalcError, ValueError):
    """Syntax error in the expression grammar, with a source position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class DomainError(JetCalcError, ValueError):
    """Operation outside the enabled expression class (e.g. division by a
    non-constant without the transcendental extension, ln of a non-positive
    sample point, unknown dependent name)."""


class EvaluationError(JetCalcError, ValueError):
    """Missing assignment or unsampleable point during evaluation."""


class WindowError(JetCalcError, ValueError):
    """A truncated field was asked for a component outside its window."""


class DegreeError(JetCalcError, ValueError):
    """Form is not homogeneous where a homogeneous one is required."""


class InvariantViolation(JetCalcError, AssertionError):
    """Two independent computations of the same quantity disagree.

    This always signals a bug (in this package or in the caller's input
    data), never a legitimate runtime condition.
    """


class InputValidationError(JetCalcError, ValueError):
    """Structurally invalid input data (complex/bicomplex/problem files)."""
