"""Dependency-model debugging toolkit for a small imperative language.

Parses programs, derives functional-dependency models, computes minimal
diagnoses for failing tests, plans measurements, slices, and drives
interactive localization sessions over a CLI and an HTTP API.
"""

from .errors import DepdiagError, ParseError, CheckError
from .parser import parse
from .checker import check
from .interp import TestCase, execute, derive_observations
from .deps import analyze, full_granularity, expand_component
from .logic import compile_sd, check_consistency
from .engine import diagnose, minimal_hitting_sets, value_filter, refine
from .planner import select_measurement
from .slicer import SliceCriterion, backward_slice, compare_slice_diag
from .session import start_session, next_action, submit_answer, \
    interaction_report

__version__ = "0.1.0"

__all__ = [
    "DepdiagError", "ParseError", "CheckError",
    "parse", "check", "TestCase", "execute", "derive_observations",
    "analyze", "full_granularity", "expand_component",
    "compile_sd", "check_consistency",
    "diagnose", "minimal_hitting_sets", "value_filter", "refine",
    "select_measurement",
    "SliceCriterion", "backward_slice", "compare_slice_diag",
    "start_session", "next_action", "submit_answer", "interaction_report",
    "__version__",
]
