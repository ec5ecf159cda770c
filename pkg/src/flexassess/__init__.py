"""Model-based process-FMEA and machine-safety risk assessment for flexible production."""

from .errors import (
    ApprovalRefusedError,
    AssessmentError,
    InfeasibleMatchError,
    MixedRecipeError,
    ModelInconsistencyError,
    ModelSyntaxError,
    ModelValidationError,
    StaleReportError,
    UnratedFailureModeError,
    Violation,
)
from .fmea import FmeaReport, FmeaRow, active_coverages, build_fmea, compare_processes, effective_factors
from .loader import load_model, parse_model
from .matching import MatchResult, StepMatch, can_manufacture, match_recipe, step_matches
from .model import ModelRepository, PerformanceLevel
from .reports import render_fmea, render_risk
from .risk import (
    ProcessApproval,
    RiskAssessmentReport,
    applicable_safety_functions,
    approve,
    assess_process,
    required_performance_level,
)
from .serialize import render_model
from .validation import validate

__version__ = "0.1.0"

__all__ = [
    "ApprovalRefusedError",
    "AssessmentError",
    "FmeaReport",
    "FmeaRow",
    "InfeasibleMatchError",
    "MatchResult",
    "MixedRecipeError",
    "ModelInconsistencyError",
    "ModelRepository",
    "ModelSyntaxError",
    "ModelValidationError",
    "PerformanceLevel",
    "ProcessApproval",
    "RiskAssessmentReport",
    "StaleReportError",
    "StepMatch",
    "UnratedFailureModeError",
    "Violation",
    "active_coverages",
    "applicable_safety_functions",
    "approve",
    "assess_process",
    "build_fmea",
    "can_manufacture",
    "compare_processes",
    "effective_factors",
    "load_model",
    "match_recipe",
    "parse_model",
    "render_fmea",
    "render_model",
    "render_risk",
    "required_performance_level",
    "step_matches",
    "validate",
]
