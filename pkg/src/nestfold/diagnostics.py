"""Positioned diagnostics and the error types shared across the package."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Diagnostic:
    """A single `file:line:col: severity: message` report."""

    message: str
    severity: str = "error"
    line: int | None = None
    col: int | None = None
    file: str | None = None

    def render(self) -> str:
        if self.line is not None:
            where = f"{self.file or '<input>'}:{self.line}:{self.col}: "
        else:
            where = ""
        return f"{where}{self.severity}: {self.message}"


class NestfoldError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(NestfoldError):
    """Syntax or name-resolution failure, with source position."""

    def __init__(self, message: str, line: int, col: int, file: str | None = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col
        self.file = file

    @property
    def diagnostic(self) -> Diagnostic:
        return Diagnostic(self.message, "error", self.line, self.col, self.file)

    def __str__(self) -> str:
        return self.diagnostic.render()


class AnalysisError(NestfoldError):
    """A request that the analysed program cannot satisfy (e.g. cross-group nesting)."""


class DerivationError(NestfoldError):
    """A derivation that is not defined for the given declaration shape."""


class PsBridgeError(DerivationError):
    """The PS bridge requires a single self-nesting declaration of the bush shape."""


class EmitError(NestfoldError):
    """Internal invariant violation while rendering a module (unscoped term etc.)."""


class EvalError(NestfoldError):
    """Runtime evaluation failure: ill-typed value, wrong algebra, overflow."""


class GuardExceeded(EvalError):
    """Depth guard tripped inside a non-structural oracle; signals a bug, not bad input."""
