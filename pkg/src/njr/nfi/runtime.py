"""Running a natural block: the session loop.

The agent is stepped until it returns or jumps. Ok and Err responses
resume it; an accepted Goto cancels the session and the interpreter
unwinds to the label; Return is checked by ``finalize_session``.
"""

import asyncio
import logging
import time
from typing import Any

from ..agents.eager import build_eager_context
from ..agents.public_api import Agent, AgentContext
from ..config import RunConfig
from ..errors import AgentError, BlockTimeout, BudgetExceeded, DanglingRef, HostTypeError, MalformedStep, UndefinedVar
from ..host.parser import enclosing_labels
from ..host.public_api import RAISE, HostState, NaturalBlock
from ..trace_store.recorder import record
from .handlers import handle_effect
from .public_api import (
    BlockOutcome,
    Completed,
    ControlTransfer,
    Emit,
    Err,
    ErrCode,
    Finish,
    HandlerMode,
    Return,
    WireValue,
)
from .serialization import check_payload, materialize
from .session import Session
from .tools import ToolRegistry

logger = logging.getLogger("njr.nfi")


async def run_natural_block(
    block: NaturalBlock,
    state: HostState,
    agent: Agent,
    mode: HandlerMode | str,
    config: RunConfig,
    *,
    tools: ToolRegistry | None = None,
) -> BlockOutcome:
    """
    Open a session for ``block`` and drive it to an outcome.

    Args:
        block: The natural block being evaluated.
        state: The interpreter running the block.
        agent: Produces the session's steps.
        mode: Handler mode deciding the effect vocabulary.
        config: Budget, timeout, eager loading and retry limits.
        tools: Registry for tool-use mode.

    Returns:
        Completed (outputs bound in the enclosing frame) or ControlTransfer.

    Raises:
        UndefinedVar: An input is unbound at entry; no agent step happens.
        BudgetExceeded: The agent attempted effect ``max_effects + 1``.
        BlockTimeout: The session outlived ``timeout_s``.
        AgentError: The agent failed, or kept producing malformed steps or incomplete returns.
    """
    mode = HandlerMode(mode)
    for name in block.inputs:
        if not state.env.is_bound(name):
            raise UndefinedVar(name)

    labels = (*enclosing_labels(state.program, block.block_id), RAISE)
    index = len(state.traces)
    tool_specs = tools.specs() if tools is not None and mode == HandlerMode.TOOLS else []
    label_names = [label.name for label in labels]
    if config.eager:
        ctx = build_eager_context(block, state, session=index, mode=mode, labels=label_names, tools=tool_specs)
    else:
        ctx = AgentContext(
            block_id=block.block_id,
            block_text=block.text,
            session=index,
            mode=mode,
            inputs=block.inputs,
            outputs=block.outputs,
            labels=label_names,
            tools=tool_specs,
        )

    depth = state.env.depth
    session = Session(
        agent=agent,
        block=block,
        mode=mode,
        labels=labels,
        frame=state.env.push(),
        index=index,
        program_digest=state.program.digest(),
        config_digest=config.digest(),
    )
    invocations = agent.invocations
    started = time.perf_counter()
    logger.info(f"Session {index} opened for block {block.block_id} in {mode.value} mode")

    try:
        outcome = await asyncio.wait_for(_drive(session, ctx, state, config, tools), timeout=config.timeout_s)
    except asyncio.TimeoutError:
        session.cancel()
        await agent.cancel()
        raise BlockTimeout(f"natural block {block.block_id} exceeded {config.timeout_s}s") from None
    except BaseException:
        if session.running:
            session.cancel()
            await agent.cancel()
        raise
    finally:
        state.env.truncate(depth)
        state.traces.append(record(session))
        state.agent_invocations += agent.invocations - invocations

    if isinstance(outcome, Completed):
        for name in block.outputs:
            state.env.bind(name, session.frame.bindings[name])
    logger.info(
        f"Session {index} ended with {type(outcome).__name__} after {session.effects_used} effect(s) "
        f"in {time.perf_counter() - started:.3f}s"
    )
    return outcome


async def _drive(
    session: Session,
    ctx: AgentContext,
    state: HostState,
    config: RunConfig,
    tools: ToolRegistry | None,
) -> BlockOutcome:
    agent = session.agent
    feedback: Err | None = None
    malformed = 0

    while True:
        step_ctx = ctx.model_copy(update={"history": list(session.entries), "feedback": feedback})
        session.agent_steps += 1
        try:
            step = await agent.step(step_ctx)
        except MalformedStep as e:
            malformed += 1
            if malformed > config.max_malformed:
                raise AgentError(f"agent output was malformed {malformed} times: {e.message}") from e
            logger.warning(f"Session {session.index}: malformed step ({e.message}), re-prompting")
            feedback = Err(code=ErrCode.TYPE_ERROR, message=e.message)
            continue
        feedback = None

        if isinstance(step, Emit) and isinstance(step.effect, Return):
            step = Finish(value=step.effect.value)
        if isinstance(step, Finish):
            result = finalize_session(session, state, step.value, config)
            if isinstance(result, Completed):
                return result
            continue

        effect = step.effect
        if session.effects_used + 1 > config.max_effects:
            raise BudgetExceeded(
                f"natural block {session.block.block_id} attempted effect {session.effects_used + 1} "
                f"with a budget of {config.max_effects}"
            )
        session.effects_used += 1
        state.effect_count += 1

        response = await handle_effect(effect, state, session, tools=tools)
        if isinstance(response, ControlTransfer):
            session.cancel(terminal=effect)
            await agent.cancel()
            return response
        logger.debug(f"Session {session.index}: {effect.kind} -> {type(response).__name__}")
        session.append(effect, response)


def finalize_session(session: Session, state: HostState, value: WireValue, config: RunConfig) -> Completed | Err:
    """
    Check a Return and finish the session.

    In tool-use and isolated modes a record payload supplies the output
    variables by field name; in shared mode they must already be bound in
    the block frame. A failed check is recorded and resumed as Err, at most
    ``max_finalize_retries`` times.

    Raises:
        AgentError: The Return failed more often than the retry limit allows.
    """
    effect = Return(value=value)
    from_record = session.mode != HandlerMode.SHARED and isinstance(value, dict)

    try:
        check_payload(value, state.heap)
    except (DanglingRef, HostTypeError) as e:
        return _reject(session, effect, Err(code=ErrCode.TYPE_ERROR, message=e.message), config)

    missing = [
        name
        for name in session.block.outputs
        if name not in session.frame.bindings and not (from_record and name in value)
    ]
    if missing:
        message = f"output variable {missing[0]} undefined"
        return _reject(session, effect, Err(code=ErrCode.UNDEFINED_VAR, message=message), config)

    host_value: Any = materialize(value, state.heap)
    if from_record:
        fields = state.heap.get(host_value)
        for name in session.block.outputs:
            if name in fields:
                session.frame.bindings[name] = fields[name]
    session.finish(terminal=effect)
    return Completed(value=host_value)


def _reject(session: Session, effect: Return, err: Err, config: RunConfig) -> Err:
    session.append(effect, err)
    session.finalize_failures += 1
    if session.finalize_failures > config.max_finalize_retries:
        raise AgentError(f"{err.message} after {session.finalize_failures} return attempt(s)")
    logger.warning(f"Session {session.index}: return rejected ({err.message}), resuming agent")
    return err
