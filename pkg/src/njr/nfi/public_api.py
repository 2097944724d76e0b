"""Public API for the natural function interface.

This module defines wire values, the effect vocabulary, effect responses,
block outcomes and agent steps. Implementation modules import from here,
not the other way around.
"""

from enum import Enum
from typing import Annotated, Any, Literal, Union

from pydantic import BaseModel, ConfigDict, Field

# =============================================================================
# Wire values
# =============================================================================


class RefTag(BaseModel):
    """A heap address as seen by natural code."""

    model_config = ConfigDict(frozen=True)

    id: int = Field(ge=0)


class LabelTag(BaseModel):
    """A label as seen by natural code."""

    model_config = ConfigDict(frozen=True)

    name: str


# WireValue = None | bool | int | float | str | RefTag | LabelTag
#           | list[WireValue] (shallow list) | dict[str, WireValue] (shallow record)
# Scalars are the round-trip domain; lists and dicts only appear as
# construction payloads and Deref results.
WireValue = Any


# =============================================================================
# Handler modes
# =============================================================================


class HandlerMode(str, Enum):
    """Which effects natural code may perform."""

    SHARED = "shared"  # six state effects + SharedEval + Return
    TOOLS = "tools"  # Call + Return over a ToolRegistry
    ISOLATED = "isolated"  # Return (and IsolatedEval) only


# =============================================================================
# Effects
# =============================================================================


class _Effect(BaseModel):
    model_config = ConfigDict(frozen=True)


class Lookup(_Effect):
    """Read a variable in X_i."""

    kind: Literal["Lookup"] = "Lookup"
    var: str


class Assign(_Effect):
    """Bind a variable in X_o or X_i in the block frame."""

    kind: Literal["Assign"] = "Assign"
    var: str
    value: WireValue = None


class Deref(_Effect):
    kind: Literal["Deref"] = "Deref"
    ref: WireValue = None


class Ref(_Effect):
    """Allocate a heap cell."""

    kind: Literal["Ref"] = "Ref"
    value: WireValue = None


class Set(_Effect):
    """Overwrite a heap cell in place."""

    kind: Literal["Set"] = "Set"
    ref: WireValue = None
    value: WireValue = None


class Goto(_Effect):
    """Leave the block by jumping to a host label. A None payload means no payload."""

    kind: Literal["Goto"] = "Goto"
    label: str
    payload: WireValue = None


class Call(_Effect):
    """Call a registered tool (tool-use mode)."""

    kind: Literal["Call"] = "Call"
    tool: str
    arg: WireValue = None


class SharedEval(_Effect):
    """Evaluate a host expression over the live scope and heap."""

    kind: Literal["SharedEval"] = "SharedEval"
    src: str


class IsolatedEval(_Effect):
    """Evaluate a host expression over copies of the inputs; heap writes are rolled back."""

    kind: Literal["IsolatedEval"] = "IsolatedEval"
    src: str


class Return(_Effect):
    """Terminal effect: natural code is done."""

    kind: Literal["Return"] = "Return"
    value: WireValue = None


Effect = Annotated[
    Union[Lookup, Assign, Deref, Ref, Set, Goto, Call, SharedEval, IsolatedEval, Return],
    Field(discriminator="kind"),
]

EFFECT_KINDS = (
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
)

MODE_VOCABULARY: dict[HandlerMode, frozenset[str]] = {
    HandlerMode.SHARED: frozenset({"Lookup", "Assign", "Deref", "Ref", "Set", "Goto", "SharedEval", "Return"}),
    HandlerMode.TOOLS: frozenset({"Call", "Return"}),
    HandlerMode.ISOLATED: frozenset({"IsolatedEval", "Return"}),
}


# =============================================================================
# Responses
# =============================================================================


class ErrCode(str, Enum):
    FORBIDDEN_VAR = "ForbiddenVar"
    UNDEFINED_VAR = "UndefinedVar"
    DANGLING_REF = "DanglingRef"
    BAD_LABEL = "BadLabel"
    TYPE_ERROR = "TypeError"
    EVAL_ERROR = "EvalError"


class Ok(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: WireValue = None


class Err(BaseModel):
    """A resumable error response. Producing one never changes host state."""

    model_config = ConfigDict(frozen=True)

    code: ErrCode
    message: str


EffectResponse = Ok | Err


class TraceEntry(BaseModel):
    """One handled effect and the response the agent was resumed with."""

    model_config = ConfigDict(frozen=True)

    effect: Effect
    response: EffectResponse


# =============================================================================
# Block outcomes
# =============================================================================


class Completed(BaseModel):
    """The block finished with every output variable bound."""

    value: Any = None  # host value of the Return payload


class ControlTransfer(BaseModel):
    """The block jumped to a host label; the session was cancelled."""

    label: Any  # host LabelName
    payload: Any = None


BlockOutcome = Completed | ControlTransfer


# =============================================================================
# Agent steps
# =============================================================================


class Emit(BaseModel):
    """The agent performs an effect and waits for its response."""

    model_config = ConfigDict(frozen=True)

    effect: Effect


class Finish(BaseModel):
    """The agent returns from the natural block."""

    model_config = ConfigDict(frozen=True)

    value: WireValue = None


AgentStep = Emit | Finish
