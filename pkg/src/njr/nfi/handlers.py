"""Effect handlers.

``handle_effect`` answers one effect with an Ok or Err response, or with a
ControlTransfer when natural code jumps to a host label. Every path that
answers Err validates before it mutates, so an Err leaves scope, heap and
control state exactly as they were.
"""

import asyncio
import logging

from ..errors import DanglingRef, HostTypeError, NjrError, ParseError
from ..host.parser import parse_expression
from ..host.public_api import HostState, LabelKind
from .public_api import (
    MODE_VOCABULARY,
    Assign,
    Call,
    ControlTransfer,
    Deref,
    Effect,
    EffectResponse,
    Err,
    ErrCode,
    Goto,
    IsolatedEval,
    Lookup,
    Ok,
    Ref,
    RefTag,
    Set,
    SharedEval,
)
from .serialization import check_payload, materialize, materialize_cell, serialize, serialize_cell, serialize_copy
from .session import Session
from .tools import ToolRegistry

logger = logging.getLogger("njr.nfi")


def _err(code: ErrCode, message: str) -> Err:
    return Err(code=code, message=message)


def _payload_error(error: NjrError) -> Err:
    if isinstance(error, DanglingRef):
        return _err(ErrCode.DANGLING_REF, f"reference {error.address} is not live")
    return _err(ErrCode.TYPE_ERROR, error.message)


async def handle_effect(
    effect: Effect,
    state: HostState,
    session: Session,
    *,
    tools: ToolRegistry | None = None,
) -> EffectResponse | ControlTransfer:
    """
    Answer one effect from a running session.

    Args:
        effect: The effect the agent emitted.
        state: The interpreter whose scope and heap the effect acts on.
        session: The running session (declared X_i, X_o, L and block frame).
        tools: Registry for Call effects.

    Returns:
        Ok or Err to resume the agent with, or ControlTransfer for an accepted Goto.
    """
    if effect.kind not in MODE_VOCABULARY[session.mode]:
        return _err(ErrCode.TYPE_ERROR, f"{effect.kind} is not available in {session.mode.value} mode")

    if isinstance(effect, Lookup):
        return _lookup(effect, state, session)
    if isinstance(effect, Assign):
        return _assign(effect, state, session)
    if isinstance(effect, Deref):
        return _deref(effect, state)
    if isinstance(effect, Ref):
        return _ref(effect, state)
    if isinstance(effect, Set):
        return _set(effect, state)
    if isinstance(effect, Goto):
        return _goto(effect, state, session)
    if isinstance(effect, Call):
        return await _call(effect, state, tools)
    if isinstance(effect, SharedEval):
        return await _shared_eval(effect, state, session)
    if isinstance(effect, IsolatedEval):
        return await _isolated_eval(effect, state, session)
    return _err(ErrCode.TYPE_ERROR, f"{effect.kind} cannot be handled here")


# =============================================================================
# Scope
# =============================================================================


def _lookup(effect: Lookup, state: HostState, session: Session) -> EffectResponse:
    if effect.var not in session.inputs:
        return _err(ErrCode.FORBIDDEN_VAR, f"variable '{effect.var}' is not readable here")
    if not state.env.is_bound(effect.var):
        return _err(ErrCode.UNDEFINED_VAR, f"variable '{effect.var}' is not defined")
    return Ok(value=serialize(state.env.lookup(effect.var)))


def _assign(effect: Assign, state: HostState, session: Session) -> EffectResponse:
    if effect.var not in session.outputs and effect.var not in session.inputs:
        return _err(ErrCode.FORBIDDEN_VAR, f"variable '{effect.var}' is not writable here")
    try:
        value = materialize(effect.value, state.heap)
    except (DanglingRef, HostTypeError) as e:
        return _payload_error(e)
    session.frame.bindings[effect.var] = value
    return Ok(value=None)


# =============================================================================
# Heap
# =============================================================================


def _live_ref(ref: object, state: HostState) -> RefTag | Err:
    if not isinstance(ref, RefTag):
        return _err(ErrCode.TYPE_ERROR, "expected a reference")
    if not state.heap.is_live(ref.id):
        return _err(ErrCode.DANGLING_REF, f"reference {ref.id} is not live")
    return ref


def _deref(effect: Deref, state: HostState) -> EffectResponse:
    ref = _live_ref(effect.ref, state)
    if isinstance(ref, Err):
        return ref
    return Ok(value=serialize_cell(state.heap.get(ref.id)))


def _ref(effect: Ref, state: HostState) -> EffectResponse:
    try:
        payload = materialize_cell(effect.value, state.heap)
    except (DanglingRef, HostTypeError) as e:
        return _payload_error(e)
    return Ok(value=serialize(state.heap.alloc(payload)))


def _set(effect: Set, state: HostState) -> EffectResponse:
    ref = _live_ref(effect.ref, state)
    if isinstance(ref, Err):
        return ref
    try:
        payload = materialize_cell(effect.value, state.heap)
    except (DanglingRef, HostTypeError) as e:
        return _payload_error(e)
    state.heap.set(ref.id, payload)
    return Ok(value=None)


# =============================================================================
# Control
# =============================================================================


def _goto(effect: Goto, state: HostState, session: Session) -> EffectResponse | ControlTransfer:
    label = session.label(effect.label)
    if label is None:
        return _err(ErrCode.BAD_LABEL, f"label '{effect.label}' is not available here")
    if effect.payload is not None and label.kind in (LabelKind.LOOP_BREAK, LabelKind.LOOP_CONTINUE):
        return _err(ErrCode.BAD_LABEL, f"label '{effect.label}' takes no payload")
    try:
        payload = materialize(effect.payload, state.heap)
    except (DanglingRef, HostTypeError) as e:
        return _payload_error(e)
    logger.debug(f"Goto {label.name} accepted")
    return ControlTransfer(label=label, payload=payload)


# =============================================================================
# Tools and evaluation
# =============================================================================


async def _call(effect: Call, state: HostState, tools: ToolRegistry | None) -> EffectResponse:
    if tools is None or effect.tool not in tools:
        return _err(ErrCode.TYPE_ERROR, f"unknown tool '{effect.tool}'")
    try:
        check_payload(effect.arg, state.heap)
    except (DanglingRef, HostTypeError) as e:
        return _payload_error(e)
    result = await tools.call(effect.tool, effect.arg)
    if isinstance(result, Err):
        return result
    try:
        check_payload(result, state.heap)
    except (DanglingRef, HostTypeError) as e:
        return _err(ErrCode.EVAL_ERROR, f"tool '{effect.tool}' returned an invalid value: {e.message}")
    return Ok(value=result)


def _visible(state: HostState, session: Session) -> dict:
    bindings = {name: state.env.lookup(name) for name in session.inputs if state.env.is_bound(name)}
    bindings.update(session.frame.bindings)
    return bindings


async def _shared_eval(effect: SharedEval, state: HostState, session: Session) -> EffectResponse:
    try:
        expr = parse_expression(effect.src, state.program)
    except ParseError as e:
        return _err(ErrCode.EVAL_ERROR, e.message)
    saved = state.heap.snapshot()
    try:
        result = await state.evaluate_detached(expr, _visible(state, session))
        return Ok(value=serialize(result))
    except NjrError as e:
        state.heap.restore(saved)
        return _err(ErrCode.EVAL_ERROR, e.message)
    except asyncio.CancelledError:
        state.heap.restore(saved)
        raise


async def _isolated_eval(effect: IsolatedEval, state: HostState, session: Session) -> EffectResponse:
    try:
        expr = parse_expression(effect.src, state.program)
    except ParseError as e:
        return _err(ErrCode.EVAL_ERROR, e.message)
    saved = state.heap.snapshot()
    first_new = state.heap.next_address
    try:
        bindings = {name: state.env.lookup(name) for name in session.inputs if state.env.is_bound(name)}
        result = await state.evaluate_detached(expr, bindings)
        return Ok(value=serialize_copy(result, state.heap, first_new))
    except NjrError as e:
        return _err(ErrCode.EVAL_ERROR, e.message)
    finally:
        state.heap.restore(saved)
