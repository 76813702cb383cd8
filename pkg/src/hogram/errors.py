"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class GrammarError(Exception):
    """Base class; ``code`` names the failure category."""

    code = "GrammarError"


class GrammarSyntaxError(GrammarError):
    code = "SyntaxError"

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class DuplicateDeclaration(GrammarError):
    code = "DuplicateDeclaration"


class UnknownSymbol(GrammarError):
    code = "UnknownSymbol"


class UnboundSymbol(GrammarError):
    code = "UnboundSymbol"


class SortMismatch(GrammarError):
    code = "SortMismatch"

    def __init__(self, expected, found, at):
        super().__init__(f"expected {expected}, found {found} at {at}")
        self.expected = expected
        self.found = found
        self.at = at


class NonBaseRuleBody(GrammarError):
    code = "NonBaseRuleBody"


class InvalidGrammar(GrammarError):
    """Raised when a grammar fails validation; carries the full report."""

    def __init__(self, report):
        first = report.issues[0]
        super().__init__(f"{first.code}: {first.message}")
        self.report = report
        self.code = first.code


class NotAWordGrammar(GrammarError):
    code = "NotAWordGrammar"


class ShapeViolation(GrammarError):
    code = "ShapeViolation"


class AssumptionViolated(GrammarError):
    code = "AssumptionViolated"


class RefinementSpaceTooLarge(GrammarError):
    code = "RefinementSpaceTooLarge"


class LinearityViolation(GrammarError):
    code = "LinearityViolation"

    def __init__(self, variable, ty):
        super().__init__(f"unbalanced binding {variable}:{ty} used twice")
        self.variable = variable
        self.ty = ty


class CaptureDetected(GrammarError):
    code = "CaptureDetected"
