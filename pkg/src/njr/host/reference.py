"""Reference big-step evaluator for programs without natural blocks.

It is written independently of ``Interpreter``: scopes are chains of
dicts passed down explicitly, each kind of jump has its own exception
class, and evaluation is synchronous. Arithmetic, rendering and the pure
builtins are shared, so agreement between the two checks scoping and
control flow.
"""

from typing import Any, Iterable

from ..errors import HostRuntimeError, HostTypeError, RaisedError, UndefinedVar
from .builtins import PURE_BUILTINS
from .heap import Heap
from .public_api import LabelKind, Program, type_name
from .values import binary, expect_addr, expect_bool, render, unary


class _Scope:
    def __init__(self, variables: dict[str, Any], parent: "_Scope | None", barrier: bool = False):
        self.variables = variables
        self.parent = parent
        self.barrier = barrier

    def lookup(self, name: str) -> Any:
        scope: _Scope | None = self
        while scope is not None:
            if name in scope.variables:
                return scope.variables[name]
            if scope.barrier:
                break
            scope = scope.parent
        raise UndefinedVar(name)


class _Break(Exception):
    pass


class _Continue(Exception):
    pass


class _Return(Exception):
    def __init__(self, value: Any):
        self.value = value


class _Jump(Exception):
    def __init__(self, name: str, value: Any):
        self.name = name
        self.value = value


class ReferenceEvaluator:
    """Evaluates a natural-free program; mirrors the interpreter's observable results."""

    def __init__(self, program: Program, stdin: Iterable[str] = ()):
        self.program = program
        self.heap = Heap()
        self.stdout: list[str] = []
        self.globals: dict[str, Any] = {}
        self._stdin = iter(stdin)
        self._functions = {fn.name: fn for fn in program.functions}

    def run(self) -> Any:
        try:
            return self._eval(self.program.body, _Scope(self.globals, None, barrier=True))
        except _Jump as jump:
            if jump.name != "raise":
                raise
            raise RaisedError(jump.value, render(jump.value, self.heap)) from None

    def _eval(self, node: Any, scope: _Scope) -> Any:
        kind = node.kind
        if kind == "const":
            return node.value
        if kind == "var":
            return scope.lookup(node.name)
        if kind == "let":
            value = self._eval(node.value, scope)
            return self._eval(node.body, _Scope({node.name: value}, scope))
        if kind == "bind":
            scope.variables[node.name] = self._eval(node.value, scope)
            return None
        if kind == "seq":
            result = None
            for item in node.items:
                result = self._eval(item, scope)
            return result
        if kind == "if":
            if expect_bool(self._eval(node.cond, scope), "if condition"):
                return self._eval(node.then, scope)
            return self._eval(node.orelse, scope) if node.orelse is not None else None
        if kind == "while":
            return self._loop(node, scope)
        if kind == "binop":
            if node.op == "and":
                return expect_bool(self._eval(node.left, scope), "and") and expect_bool(
                    self._eval(node.right, scope), "and"
                )
            if node.op == "or":
                return expect_bool(self._eval(node.left, scope), "or") or expect_bool(
                    self._eval(node.right, scope), "or"
                )
            left = self._eval(node.left, scope)
            return binary(node.op, left, self._eval(node.right, scope))
        if kind == "unary":
            return unary(node.op, self._eval(node.operand, scope))
        if kind == "ref":
            return self.heap.alloc(self._eval(node.value, scope))
        if kind == "deref":
            cell = self.heap.get(expect_addr(self._eval(node.ref, scope), "!"))
            if isinstance(cell, (list, dict)):
                raise HostTypeError(f"cannot dereference a {type_name(cell)}; index it instead")
            return cell
        if kind == "setref":
            address = expect_addr(self._eval(node.ref, scope), ":=")
            self.heap.set(address, self._eval(node.value, scope))
            return None
        if kind == "setindex":
            return self._set_index(node, scope)
        if kind == "index":
            return self._index(node, scope)
        if kind == "label":
            try:
                return self._eval(node.body, scope)
            except _Jump as jump:
                if jump.name != node.label.name:
                    raise
                return jump.value
        if kind == "goto":
            return self._goto(node, scope)
        if kind == "call":
            return self._call(node, scope)
        if kind == "list":
            return self.heap.alloc([self._eval(item, scope) for item in node.items])
        if kind == "record":
            fields: dict[str, Any] = {}
            for name, expr in node.fields:
                fields[name] = self._eval(expr, scope)
            return self.heap.alloc(fields)
        raise HostRuntimeError(f"reference evaluator cannot run '{kind}'")

    def _loop(self, node: Any, scope: _Scope) -> None:
        while expect_bool(self._eval(node.cond, scope), "while condition"):
            try:
                self._eval(node.body, scope)
            except _Continue:
                continue
            except _Break:
                break
        return None

    def _goto(self, node: Any, scope: _Scope) -> None:
        value = self._eval(node.payload, scope) if node.payload is not None else None
        kind = node.label.kind
        if kind == LabelKind.LOOP_BREAK:
            raise _Break()
        if kind == LabelKind.LOOP_CONTINUE:
            raise _Continue()
        if kind == LabelKind.FUNCTION_RETURN:
            raise _Return(value)
        raise _Jump(node.label.name, value)

    def _call(self, node: Any, scope: _Scope) -> Any:
        args = [self._eval(arg, scope) for arg in node.args]
        fn = self._functions.get(node.name)
        if fn is not None:
            try:
                return self._eval(fn.body, _Scope(dict(zip(fn.params, args)), None, barrier=True))
            except _Return as returned:
                return returned.value
        if node.name == "print":
            self.stdout.append(render(args[0], self.heap))
            return None
        if node.name == "input":
            line = next(self._stdin, None)
            if line is None:
                raise HostRuntimeError("input(): end of stdin")
            line = line.rstrip("\r\n")
            self.stdout.append(args[0] + line)
            return line
        return PURE_BUILTINS[node.name](self.heap, *args)

    def _container(self, value: Any) -> Any:
        return self.heap.get(expect_addr(value, "indexing"))

    def _index(self, node: Any, scope: _Scope) -> Any:
        target = self._eval(node.target, scope)
        index = self._eval(node.index, scope)
        if isinstance(target, str):
            _check_position(target, index)
            return target[index]
        cell = self._container(target)
        if isinstance(cell, list):
            _check_position(cell, index)
            return cell[index]
        if isinstance(cell, dict):
            if not isinstance(index, str):
                raise HostTypeError(f"record keys are Str, got {type_name(index)}")
            if index not in cell:
                raise HostRuntimeError(f"record has no field '{index}'")
            return cell[index]
        raise HostTypeError(f"cannot index into {type_name(cell)}")

    def _set_index(self, node: Any, scope: _Scope) -> None:
        target = self._eval(node.target, scope)
        index = self._eval(node.index, scope)
        value = self._eval(node.value, scope)
        cell = self.heap.get(expect_addr(target, "indexed assignment"))
        if isinstance(cell, list):
            _check_position(cell, index)
            cell[index] = value
        elif isinstance(cell, dict):
            if not isinstance(index, str):
                raise HostTypeError(f"record keys are Str, got {type_name(index)}")
            cell[index] = value
        else:
            raise HostTypeError(f"cannot index into {type_name(cell)}")
        return None


def _check_position(sequence: Any, index: Any) -> None:
    if isinstance(index, bool) or not isinstance(index, int):
        raise HostTypeError(f"positions are Int, got {type_name(index)}")
    if not 0 <= index < len(sequence):
        raise HostRuntimeError(f"index {index} out of range for length {len(sequence)}")
