"""Natural function interface: wire values, effects, handlers and sessions.

``handlers`` and ``runtime`` are imported from their modules directly;
they depend on the agents package, which depends on this one.
"""

from .public_api import (
    MODE_VOCABULARY,
    AgentStep,
    Assign,
    BlockOutcome,
    Call,
    Completed,
    ControlTransfer,
    Deref,
    Effect,
    EffectResponse,
    Emit,
    Err,
    ErrCode,
    Finish,
    Goto,
    HandlerMode,
    IsolatedEval,
    LabelTag,
    Lookup,
    Ok,
    Ref,
    RefTag,
    Return,
    Set,
    SharedEval,
    TraceEntry,
)
from .serialization import materialize, reify, serialize, serialize_cell
from .tools import ToolRegistry, ToolSpec, register_tool, standard_tools
from .wire import canonical, decode_effect, decode_value, encode_effect, encode_value

__all__ = [
    # Public API - Wire values and modes
    "RefTag",
    "LabelTag",
    "HandlerMode",
    "MODE_VOCABULARY",
    # Public API - Effects
    "Effect",
    "Lookup",
    "Assign",
    "Deref",
    "Ref",
    "Set",
    "Goto",
    "Call",
    "SharedEval",
    "IsolatedEval",
    "Return",
    # Public API - Responses and outcomes
    "EffectResponse",
    "Ok",
    "Err",
    "ErrCode",
    "TraceEntry",
    "BlockOutcome",
    "Completed",
    "ControlTransfer",
    # Public API - Agent steps
    "AgentStep",
    "Emit",
    "Finish",
    # Serialization
    "serialize",
    "serialize_cell",
    "reify",
    "materialize",
    # Wire codec
    "canonical",
    "encode_value",
    "decode_value",
    "encode_effect",
    "decode_effect",
    # Tools
    "ToolRegistry",
    "ToolSpec",
    "register_tool",
    "standard_tools",
]
