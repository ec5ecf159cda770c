from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True, order=True)
class Violation:
    element: str
    rule: str
    message: str

    def __str__(self) -> str:
        return f"{self.element}: [{self.rule}] {self.message}"


class AssessmentError(Exception):
    """Base class for all errors raised by this package."""


class ModelSyntaxError(AssessmentError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        super().__init__(f"line {line} column {column}: {message}" if line else message)


class ModelValidationError(AssessmentError):
    def __init__(self, violations: Sequence[Violation]):
        self.violations = list(violations)
        lines = "\n".join(f"  {v}" for v in self.violations)
        super().__init__(f"{len(self.violations)} model violation(s):\n{lines}")


class ModelInconsistencyError(AssessmentError):
    """A reference the validator should have rejected was met during evaluation."""


class InfeasibleMatchError(AssessmentError):
    def __init__(self, message: str, diagnostics: Sequence[str] = ()):
        self.diagnostics = list(diagnostics)
        super().__init__(message)


class UnratedFailureModeError(AssessmentError):
    def __init__(self, step_id: str, failure_mode_id: str):
        self.step_id = step_id
        self.failure_mode_id = failure_mode_id
        super().__init__(
            f"process step {step_id}: failure mode {failure_mode_id} has no severity "
            "rating in the recipe"
        )


class MixedRecipeError(AssessmentError):
    pass


class ApprovalRefusedError(AssessmentError):
    def __init__(self, process_id: str, uncovered: Sequence[str]):
        self.process_id = process_id
        self.uncovered = list(uncovered)
        super().__init__(
            f"approval of {process_id} refused: uncovered hazards "
            + ", ".join(self.uncovered)
        )


class StaleReportError(AssessmentError):
    pass
