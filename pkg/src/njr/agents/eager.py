"""Eager variable loading: input values and types in the agent's first context."""

from ..host.public_api import Addr, HostState, NaturalBlock, type_name
from ..nfi.public_api import HandlerMode
from ..nfi.serialization import serialize
from ..nfi.tools import ToolSpec
from .public_api import AgentContext, EagerVar

_PREVIEW_KEYS = 8


def preview(value: object, state: HostState) -> tuple[str, str | None]:
    """Type name and a one-line shallow preview of a value."""
    if not isinstance(value, Addr):
        return type_name(value), None
    cell = state.heap.get(value)
    if isinstance(cell, dict):
        keys = sorted(cell)
        shown = ", ".join(keys[:_PREVIEW_KEYS]) + (", ..." if len(keys) > _PREVIEW_KEYS else "")
        return "Record", f"Record({shown})"
    if isinstance(cell, list):
        return "List", f"List(length {len(cell)})"
    return "Ref", f"Ref({type_name(cell)})"


def build_eager_context(
    block: NaturalBlock,
    state: HostState,
    *,
    session: int = 0,
    mode: HandlerMode = HandlerMode.SHARED,
    labels: list[str] | None = None,
    tools: list[ToolSpec] | None = None,
) -> AgentContext:
    """
    Context with every input's name, type and wire value.

    Composites appear as a RefTag plus a preview; their contents are never
    copied into the context.

    Raises:
        UndefinedVar: An input is not bound.
    """
    eager_vars = []
    for name in block.inputs:
        value = state.env.lookup(name)
        type_label, shown = preview(value, state)
        eager_vars.append(EagerVar(name=name, type=type_label, value=serialize(value), preview=shown))
    return AgentContext(
        block_id=block.block_id,
        block_text=block.text,
        session=session,
        mode=mode,
        inputs=block.inputs,
        outputs=block.outputs,
        eager_vars=eager_vars,
        labels=labels or [],
        tools=tools or [],
    )
