"""Exception hierarchy shared by every stage of the workbench."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int
    end_line: int
    end_column: int

    def __post_init__(self):
        if (self.end_line, self.end_column) < (self.line, self.column):
            raise ValueError("span ends before it starts")

    def __str__(self):
        return f"{self.file}:{self.line}:{self.column}"


class XcrsError(Exception):
    """Base class; ``stage`` labels the pipeline stage that failed."""

    stage = "xcrs"


class TermSyntaxError(XcrsError):
    stage = "syntax"

    def __init__(self, message: str, span: SourceSpan | None = None):
        self.message = message
        self.span = span
        super().__init__(f"{span}: {message}" if span else message)


class XSyntaxError(TermSyntaxError):
    stage = "parse"


class ValidationError(XcrsError):
    """A rule violates the linearity/scoping discipline.

    ``kind`` is a stable diagnostic code, ``symbol`` the offending name.
    """

    stage = "check"

    def __init__(self, rule: str, kind: str, symbol: str, detail: str = ""):
        self.rule = rule
        self.kind = kind
        self.symbol = symbol
        msg = f"rule {rule}: {kind} {symbol}"
        super().__init__(f"{msg} ({detail})" if detail else msg)


class InstantiationError(XcrsError):
    stage = "rewrite"


class FreeSubstitutionError(InstantiationError):
    """A variable previously matched through a Free option was substituted."""


class StepLimitExceeded(XcrsError):
    stage = "rewrite"

    def __init__(self, term, steps: int):
        self.term = term
        self.steps = steps
        super().__init__(f"step limit exceeded after {steps} steps")


class StuckError(XcrsError):
    """Normalization finished but left constructs of the wrong vocabulary."""

    def __init__(self, stage: str, term, reason: str):
        self.stage = stage
        self.term = term
        self.reason = reason
        super().__init__(f"stuck ({reason})")


class InferenceError(XcrsError):
    stage = "infer"

    def __init__(self, term):
        self.term = term
        super().__init__("no derivation")


class ExecutionError(XcrsError):
    stage = "run"
