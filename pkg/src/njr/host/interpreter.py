"""Tree-walking interpreter for the host language.

State is the triple of scope stack (``Env``), heap and control state.
Loops, function bodies, user labels and the program itself run inside
label frames; a goto raises ``Unwind`` which the owning frame
catches after restoring the scope depth it saved on entry. Natural
blocks are handed to the NFI runtime.
"""

import asyncio
import logging
import sys
import time
from typing import Any, Awaitable, Callable, Iterable

from ..config import RunConfig
from ..errors import AgentError, HostRuntimeError, HostTypeError, NjrError, RaisedError
from .builtins import IO_BUILTINS, PURE_BUILTINS
from .control import ControlState, Unwind, unwind_to_label
from .env import Env
from .heap import Heap
from .public_api import (
    BREAK,
    CONTINUE,
    RAISE,
    RETURN,
    Addr,
    FunctionDef,
    HostState,
    LabelName,
    Program,
    RunResult,
    type_name,
)
from .values import binary, expect_addr, expect_bool, render, unary

logger = logging.getLogger("njr.interpreter")

# Python frames reserved per nested host call: dispatch, label frame, body and nested expressions.
FRAMES_PER_CALL = 24


class Interpreter(HostState):
    """
    Runs one program once.

    Instances are single-use and confined to one task; parallel runs use
    separate instances.
    """

    def __init__(
        self,
        program: Program,
        *,
        stdin: Iterable[str] | None = None,
        agent: Any = None,
        config: RunConfig | None = None,
        tools: Any = None,
        echo: Callable[[str], None] | None = None,
    ):
        self.program = program
        self.agent = agent
        self.config = config or RunConfig()
        self.tools = tools
        self.env = Env()
        self.heap = Heap()
        self.control = ControlState()
        self.stdout: list[str] = []
        self.traces: list[Any] = []
        self.effect_count = 0
        self.agent_invocations = 0
        self._stdin = iter(stdin if stdin is not None else ())
        self._echo = echo
        self._io_allowed = True
        self._in_session = False
        self._call_depth = 0
        self._functions: dict[str, FunctionDef] = {fn.name: fn for fn in program.functions}
        self._dispatch: dict[str, Callable[[Any], Awaitable[Any]]] = {
            "const": self._eval_const,
            "var": self._eval_var,
            "let": self._eval_let,
            "bind": self._eval_bind,
            "seq": self._eval_seq,
            "if": self._eval_if,
            "while": self._eval_while,
            "binop": self._eval_binop,
            "unary": self._eval_unary,
            "ref": self._eval_ref,
            "deref": self._eval_deref,
            "setref": self._eval_setref,
            "setindex": self._eval_setindex,
            "index": self._eval_index,
            "label": self._eval_label,
            "goto": self._eval_goto,
            "call": self._eval_call,
            "list": self._eval_list,
            "record": self._eval_record,
            "natural": self._eval_natural,
        }

    async def run(self) -> RunResult:
        """Evaluate the program body under the top-level ``raise`` label."""
        started = time.perf_counter()
        _reserve_frames(self.config.max_call_depth)
        try:
            frame = self.control.enter(RAISE, self.env.depth)
            try:
                value = await self.eval(self.program.body)
            except Unwind as transfer:
                if transfer.frame is not frame:
                    raise
                raise RaisedError(transfer.payload, render(transfer.payload, self.heap)) from None
            except RecursionError:
                raise HostRuntimeError("recursion depth exceeded") from None
            finally:
                self.control.exit(frame)
        except NjrError as error:
            error.trace = list(self.traces)
            error.stdout = list(self.stdout)
            logger.info(f"Run failed after {time.perf_counter() - started:.3f}s: {type(error).__name__}")
            raise

        wall_time = time.perf_counter() - started
        logger.info(f"Run finished in {wall_time:.3f}s with {self.effect_count} effect(s)")
        return RunResult(
            value=value,
            stdout=list(self.stdout),
            traces=list(self.traces),
            effect_count=self.effect_count,
            agent_invocations=self.agent_invocations,
            wall_time_s=wall_time,
            globals=dict(self.env.globals),
            heap=self.heap,
        )

    async def eval(self, node: Any) -> Any:
        return await self._dispatch[node.kind](node)

    async def evaluate_detached(self, expr: Any, bindings: dict[str, Any]) -> Any:
        saved = (self.env, self.control, self._io_allowed)
        self.env = Env(bindings)
        self.control = ControlState()
        self._io_allowed = False
        try:
            return await self.eval(expr)
        finally:
            self.env, self.control, self._io_allowed = saved

    async def _checkpoint(self) -> None:
        # A session timeout can only cancel host code at a suspension point.
        if self._in_session:
            await asyncio.sleep(0)

    async def _with_label(self, label: LabelName, body: Callable[[], Awaitable[Any]]) -> Any:
        frame = self.control.enter(label, self.env.depth)
        try:
            return await body()
        except Unwind as transfer:
            if transfer.frame is not frame:
                raise
            self.env.truncate(frame.scope_depth)
            assert self.env.depth == frame.scope_depth
            return transfer.payload
        finally:
            self.control.exit(frame)

    # =========================================================================
    # Expressions
    # =========================================================================

    async def _eval_const(self, node) -> Any:
        return node.value

    async def _eval_var(self, node) -> Any:
        return self.env.lookup(node.name)

    async def _eval_let(self, node) -> Any:
        value = await self.eval(node.value)
        self.env.push({node.name: value})
        result = await self.eval(node.body)
        self.env.pop()
        return result

    async def _eval_bind(self, node) -> None:
        self.env.bind(node.name, await self.eval(node.value))

    async def _eval_seq(self, node) -> Any:
        result = None
        for item in node.items:
            result = await self.eval(item)
        return result

    async def _eval_if(self, node) -> Any:
        if expect_bool(await self.eval(node.cond), "if condition"):
            return await self.eval(node.then)
        if node.orelse is not None:
            return await self.eval(node.orelse)
        return None

    async def _eval_while(self, node) -> None:
        async def loop() -> None:
            while expect_bool(await self.eval(node.cond), "while condition"):
                await self._with_label(CONTINUE, lambda: self.eval(node.body))
                await self._checkpoint()

        await self._with_label(BREAK, loop)
        return None

    async def _eval_binop(self, node) -> Any:
        if node.op in ("and", "or"):
            left = expect_bool(await self.eval(node.left), node.op)
            if left == (node.op == "or"):
                return left
            return expect_bool(await self.eval(node.right), node.op)
        left = await self.eval(node.left)
        right = await self.eval(node.right)
        return binary(node.op, left, right)

    async def _eval_unary(self, node) -> Any:
        return unary(node.op, await self.eval(node.operand))

    async def _eval_ref(self, node) -> Addr:
        return self.heap.alloc(await self.eval(node.value))

    async def _eval_deref(self, node) -> Any:
        address = expect_addr(await self.eval(node.ref), "!")
        cell = self.heap.get(address)
        if isinstance(cell, (list, dict)):
            raise HostTypeError(f"cannot dereference a {type_name(cell)}; index it instead")
        return cell

    async def _eval_setref(self, node) -> None:
        address = expect_addr(await self.eval(node.ref), ":=")
        value = await self.eval(node.value)
        self.heap.set(address, value)

    async def _eval_setindex(self, node) -> None:
        target = await self.eval(node.target)
        index = await self.eval(node.index)
        value = await self.eval(node.value)
        cell = self.heap.get(expect_addr(target, "indexed assignment"))
        if isinstance(cell, list):
            cell[_list_position(cell, index)] = value
        elif isinstance(cell, dict):
            if not isinstance(index, str):
                raise HostTypeError(f"record keys are Str, got {type_name(index)}")
            cell[index] = value
        else:
            raise HostTypeError(f"cannot index into {type_name(cell)}")

    async def _eval_index(self, node) -> Any:
        target = await self.eval(node.target)
        index = await self.eval(node.index)
        if isinstance(target, str):
            return target[_list_position(target, index)]
        cell = self.heap.get(expect_addr(target, "indexing"))
        if isinstance(cell, list):
            return cell[_list_position(cell, index)]
        if isinstance(cell, dict):
            if not isinstance(index, str):
                raise HostTypeError(f"record keys are Str, got {type_name(index)}")
            if index not in cell:
                raise HostRuntimeError(f"record has no field '{index}'")
            return cell[index]
        raise HostTypeError(f"cannot index into {type_name(cell)}")

    async def _eval_label(self, node) -> Any:
        return await self._with_label(node.label, lambda: self.eval(node.body))

    async def _eval_goto(self, node) -> None:
        payload = await self.eval(node.payload) if node.payload is not None else None
        unwind_to_label(self.control, node.label, payload)

    async def _eval_call(self, node) -> Any:
        args = [await self.eval(arg) for arg in node.args]
        fn = self._functions.get(node.name)
        if fn is not None:
            return await self._call_function(fn, args)
        if node.name in IO_BUILTINS:
            if not self._io_allowed:
                raise HostRuntimeError(f"{node.name}() is not available here")
            if node.name == "print":
                return self._print(args[0])
            return self._input(args[0])
        builtin = PURE_BUILTINS.get(node.name)
        if builtin is None:
            raise HostRuntimeError(f"unknown function '{node.name}'")
        return builtin(self.heap, *args)

    async def _call_function(self, fn: FunctionDef, args: list[Any]) -> Any:
        if len(args) != len(fn.params):
            raise HostTypeError(f"'{fn.name}' takes {len(fn.params)} argument(s), got {len(args)}")

        async def body() -> Any:
            self.env.push(dict(zip(fn.params, args)), barrier=True)
            value = await self.eval(fn.body)
            self.env.pop()
            return value

        if self._call_depth >= self.config.max_call_depth:
            raise HostRuntimeError(f"recursion depth exceeded ({self.config.max_call_depth} nested calls)")
        await self._checkpoint()
        self._call_depth += 1
        try:
            return await self._with_label(RETURN, body)
        finally:
            self._call_depth -= 1

    async def _eval_list(self, node) -> Addr:
        items = [await self.eval(item) for item in node.items]
        return self.heap.alloc(items)

    async def _eval_record(self, node) -> Addr:
        fields: dict[str, Any] = {}
        for name, expr in node.fields:
            fields[name] = await self.eval(expr)
        return self.heap.alloc(fields)

    async def _eval_natural(self, node) -> Any:
        from ..nfi.public_api import ControlTransfer
        from ..nfi.runtime import run_natural_block

        if self._in_session:
            raise HostRuntimeError("natural blocks cannot run inside another natural block")
        if self.agent is None:
            raise AgentError("no agent is configured for natural blocks")
        self._in_session = True
        try:
            outcome = await run_natural_block(
                node.block, self, self.agent, self.config.mode, self.config, tools=self.tools
            )
        finally:
            self._in_session = False
        if isinstance(outcome, ControlTransfer):
            unwind_to_label(self.control, outcome.label, outcome.payload)
        return outcome.value

    # =========================================================================
    # I/O builtins
    # =========================================================================

    def _emit(self, line: str) -> None:
        self.stdout.append(line)
        if self._echo is not None:
            self._echo(line)

    def _print(self, value: Any) -> None:
        self._emit(render(value, self.heap))

    def _input(self, prompt: Any) -> str:
        if not isinstance(prompt, str):
            raise HostTypeError(f"input() expects a Str prompt, got {type_name(prompt)}")
        line = next(self._stdin, None)
        if line is None:
            raise HostRuntimeError("input(): end of stdin")
        line = line.rstrip("\r\n")
        self._emit(prompt + line)
        return line


def _list_position(sequence: list | str, index: Any) -> int:
    if isinstance(index, bool) or not isinstance(index, int):
        raise HostTypeError(f"positions are Int, got {type_name(index)}")
    if not 0 <= index < len(sequence):
        raise HostRuntimeError(f"index {index} out of range for length {len(sequence)}")
    return index


async def run(
    program: Program,
    stdin: Iterable[str] | None = None,
    agent: Any = None,
    config: RunConfig | None = None,
    *,
    tools: Any = None,
    echo: Callable[[str], None] | None = None,
) -> RunResult:
    """
    Run a parsed program to completion.

    Args:
        program: Parsed program.
        stdin: Lines served to ``input``.
        agent: Agent executing natural blocks (may be None if there are none).
        config: Run configuration.
        tools: ToolRegistry for tool-use mode.
        echo: Called with each transcript line as it is printed.

    Returns:
        RunResult with value, stdout transcript, traces and counters.
    """
    interpreter = Interpreter(program, stdin=stdin, agent=agent, config=config, tools=tools, echo=echo)
    return await interpreter.run()


def _reserve_frames(call_depth: int) -> None:
    needed = call_depth * FRAMES_PER_CALL + 1000
    if sys.getrecursionlimit() < needed:
        sys.setrecursionlimit(needed)
