#!/usr/bin/env python3
"""
Error Types - Torsion Calculator
Exception hierarchy shared by the algebra, evaluator, script and CLI layers
"""

from typing import List, Optional, Sequence


class TorsCalcError(Exception):
    """Base class for every error raised by the calculator"""


class NotDivisible(TorsCalcError):
    """Exact scalar division left a remainder"""


class ZeroDivisor(TorsCalcError):
    """Division by the zero scalar"""


class DegreeMismatch(TorsCalcError):
    """Graded classes of different degrees were combined"""

    def __init__(self, left: int, right: int):
        super().__init__(f"cannot combine classes of degree {left} and {right}")
        self.left = left
        self.right = right


class MalformedExpression(TorsCalcError):
    """A bundle expression failed validation"""

    def __init__(self, message: str, node=None, diagnostics: Optional[Sequence] = None):
        super().__init__(message)
        self.node = node
        self.diagnostics: List = list(diagnostics or [])


class UnsupportedNode(TorsCalcError):
    """No evaluation rule exists for this kind of node"""


class NotDecomposable(TorsCalcError):
    """Theory is not a combination of the FR and MMM theories"""


class ParseError(TorsCalcError):
    """Script text does not match the grammar"""

    def __init__(self, message: str, line: int, column: int, expected: Sequence[str] = ()):
        self.line = line
        self.column = column
        self.expected = list(expected)
        detail = f"{message} at line {line}, column {column}"
        if self.expected:
            detail += f" (expected {', '.join(self.expected)})"
        super().__init__(detail)


class SemanticError(TorsCalcError):
    """Script parses but refers to something it may not"""

    def __init__(self, message: str, line: int, statement: str = ""):
        self.line = line
        self.statement = statement
        detail = f"line {line}: {message}"
        if statement:
            detail += f" in `{statement}`"
        super().__init__(detail)


class InvalidMinimizeCall(TorsCalcError):
    """minimize() was asked to shrink an expression that passes its check"""
