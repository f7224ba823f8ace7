"""Exception hierarchy shared by every module."""

from __future__ import annotations


class SimplicityError(Exception):
    """Base class for all errors raised by this package."""


class TypeMismatch(SimplicityError):
    pass


class OutOfRange(SimplicityError):
    pass


class TooLarge(SimplicityError):
    pass


class NotCore(SimplicityError):
    pass


class MalformedDag(SimplicityError):
    pass


class TypeInferenceError(SimplicityError):
    def __init__(self, node: int, message: str):
        super().__init__(f"node {node}: {message}")
        self.node = node


class UnificationClash(TypeInferenceError):
    pass


class OccursCheck(TypeInferenceError):
    pass


class WitnessTypeMismatch(TypeInferenceError):
    pass


class RuleViolation(SimplicityError):
    def __init__(self, node: int, rule: str, detail: str = ""):
        msg = f"node {node} violates the {rule} rule"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.node = node
        self.rule = rule


class MissingWitness(SimplicityError):
    pass


class MalformedCells(SimplicityError):
    pass


class WidthMismatch(SimplicityError):
    pass


class UnknownName(SimplicityError):
    pass


class EvaluationFailed(SimplicityError):
    pass


class UnsupportedWidth(SimplicityError):
    pass


class InternalCrash(SimplicityError):
    """A non-assertion crash of the Bit Machine on a well-typed term (always a bug)."""

    def __init__(self, reason):
        super().__init__(f"Bit Machine crashed unexpectedly: {reason}")
        self.reason = reason


class JetError(SimplicityError):
    pass


class DuplicateRoot(JetError):
    pass


class SpecMismatch(JetError):
    pass


class WitnessInJet(JetError):
    pass


class ParseError(SimplicityError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        if line:
            message = f"{line}:{column}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


class UnboundName(ParseError):
    pass


class DuplicateLet(ParseError):
    pass


class CountMismatch(SimplicityError):
    pass
