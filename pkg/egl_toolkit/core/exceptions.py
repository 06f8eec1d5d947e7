"""
Error taxonomy shared by the services and the command-line front end.

Each error carries a machine-readable ``kind`` and the exit status the CLI
reports for it.
"""

from enum import Enum
from typing import Any, Dict, Optional


EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_CONVERGENCE = 4


class SpecFunErrorKind(str, Enum):
    """Failure kinds raised by the special functions."""
    DOMAIN_ERROR = "DomainError"
    NON_CONVERGENCE = "NonConvergence"


class EGLError(Exception):
    """Base class for every toolkit error."""

    kind: str = "EGLError"
    exit_code: int = EXIT_DATA

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error": self.kind,
            "detail": self.detail,
            "exit_code": self.exit_code,
        }


class SpecFunError(EGLError):
    """Base class of the two special-function failures."""


class DomainError(SpecFunError, ValueError):
    """An argument lies outside the documented domain."""

    kind = SpecFunErrorKind.DOMAIN_ERROR.value
    exit_code = EXIT_DATA


class NonConvergence(SpecFunError, ArithmeticError):
    """An iterative method stopped at its iteration cap."""

    kind = SpecFunErrorKind.NON_CONVERGENCE.value
    exit_code = EXIT_CONVERGENCE

    def __init__(self, detail: str, iterations: Optional[int] = None):
        super().__init__(detail)
        self.iterations = iterations

    def to_dict(self) -> Dict[str, Any]:
        payload = super().to_dict()
        payload["iterations"] = self.iterations
        return payload


class InvalidData(EGLError, ValueError):
    """Observations that cannot be used (empty, nonpositive, non-finite)."""

    kind = "InvalidData"
    exit_code = EXIT_DATA

    def __init__(self, detail: str, line: Optional[int] = None):
        super().__init__(detail if line is None else f"line {line}: {detail}")
        self.line = line

    def to_dict(self) -> Dict[str, Any]:
        payload = super().to_dict()
        payload["line"] = self.line
        return payload


class ParseError(InvalidData):
    """A token in an input file is not a number."""

    kind = "ParseError"


class UnknownDataset(EGLError, LookupError):
    kind = "UnknownDataset"
    exit_code = EXIT_DATA


class SingularMatrix(EGLError, ArithmeticError):
    """An information matrix could not be inverted."""

    kind = "SingularMatrix"
    exit_code = EXIT_CONVERGENCE


class UsageError(EGLError):
    kind = "UsageError"
    exit_code = EXIT_USAGE
