"""Host language: parser, scope stack, heap, control state and interpreters."""

from .control import ControlState, LabelFrame, Unwind, unwind_to_label
from .env import Env, Frame
from .heap import Heap
from .interpreter import Interpreter, run
from .parser import enclosing_labels, load_program, parse_expression, parse_program
from .public_api import (
    BREAK,
    CONTINUE,
    RAISE,
    RETURN,
    Addr,
    FunctionDef,
    HostState,
    LabelKind,
    LabelName,
    LabelVal,
    NaturalBlock,
    Program,
    RunResult,
    type_name,
)
from .reference import ReferenceEvaluator
from .values import render, to_plain

__all__ = [
    # Public API - Values and labels
    "Addr",
    "LabelKind",
    "LabelName",
    "LabelVal",
    "BREAK",
    "CONTINUE",
    "RETURN",
    "RAISE",
    "type_name",
    # Public API - Syntax and results
    "FunctionDef",
    "NaturalBlock",
    "Program",
    "RunResult",
    "HostState",
    # State
    "ControlState",
    "LabelFrame",
    "Unwind",
    "unwind_to_label",
    "Env",
    "Frame",
    "Heap",
    # Operations
    "parse_program",
    "load_program",
    "parse_expression",
    "enclosing_labels",
    "Interpreter",
    "run",
    "ReferenceEvaluator",
    "render",
    "to_plain",
]
