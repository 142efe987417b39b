from .backends import (BackendError, Completion, HttpStatus, KeyMissing, LiveBackend,
                       MockBackend, RetriesExhausted, RunLedger, ScriptedBackend, Timeout,
                       UnknownDesign, request_plan)
from .designs import MockDesign, lookup_design, mock_design_library
from .plan import (ActionPlan, DuplicateCoordinate, NoJsonFound, NonIntegerCoordinate,
                   OutOfBounds, PlanParseError, SchemaMismatch, Violation, extract_json,
                   parse_plan, serialize_plan, validate_plan)
from .prompt import PromptParts, build_correction, build_prompt, build_reprompt

__all__ = [
    "ActionPlan", "BackendError", "Completion", "DuplicateCoordinate", "HttpStatus",
    "KeyMissing", "LiveBackend", "MockBackend", "MockDesign", "NoJsonFound",
    "NonIntegerCoordinate", "OutOfBounds", "PlanParseError", "PromptParts", "RetriesExhausted",
    "RunLedger", "SchemaMismatch", "ScriptedBackend", "Timeout", "UnknownDesign", "Violation",
    "build_correction", "build_prompt", "build_reprompt", "extract_json", "lookup_design",
    "mock_design_library", "parse_plan", "request_plan", "serialize_plan", "validate_plan",
]
