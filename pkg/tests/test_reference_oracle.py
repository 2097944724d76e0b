"""Differential tests: the interpreter against the reference evaluator on generated programs."""

import itertools
import random
from dataclasses import dataclass, field, replace

import pytest

from njr.errors import HostRuntimeError, RaisedError
from njr.host.interpreter import run
from njr.host.parser import parse_program
from njr.host.reference import ReferenceEvaluator

PROGRAMS = 1000


@dataclass
class _Scope:
    """What generated code may mention at a point. ``ints`` holds expressions, not just names."""

    ints: list[str]
    refs: list[str]
    functions: list[str]
    top_level: bool = False
    in_loop: bool = False
    in_function: bool = False
    labels: list[str] = field(default_factory=list)

    def child(self, **changes) -> "_Scope":
        fields = {"ints": list(self.ints), "refs": list(self.refs), "labels": list(self.labels)}
        fields.update(changes)
        return replace(self, **fields)


class ProgramGenerator:
    """
    Random natural-free programs that always terminate.

    Loops count a private reference up to a small bound and bump it first
    thing in the body, functions only call functions defined before them,
    and gotos only name labels that enclose them.
    """

    def __init__(self, seed: int):
        self.rng = random.Random(seed)
        self._ids = itertools.count()

    def fresh(self, prefix: str) -> str:
        return f"{prefix}{next(self._ids)}"

    def literal(self) -> str:
        return str(self.rng.randint(-3, 9))

    def program(self) -> str:
        functions: list[str] = []
        names: list[str] = []
        for _ in range(self.rng.randint(0, 2)):
            name = self.fresh("f")
            functions.append(self.function(name, list(names)))
            names.append(name)

        top = _Scope(ints=["v0", "!r0", "!r1"], refs=["r0", "r1"], functions=names, top_level=True)
        lines = [
            f"let v0 = {self.literal()}",
            f"let r0 = ref {self.literal()}",
            f"let r1 = ref {self.literal()}",
            f"let xs = [{self.literal()}, {self.literal()}, {self.literal()}]",
            f"let rec = {{a: {self.literal()}, b: {self.literal()}}}",
        ]
        lines += self.block(top, depth=0, size=self.rng.randint(2, 6))
        lines.append(self.rng.choice([self.int_expr(top), "xs", "rec", "!r0", "()"]))
        return "\n".join(functions) + "\n" + ";\n".join(lines)

    def function(self, name: str, callable_: list[str]) -> str:
        scope = _Scope(ints=["a", "b", "!acc"], refs=["acc"], functions=callable_, in_function=True)
        body = ["let acc = ref a"] + self.block(scope, depth=1) + [self.int_expr(scope)]
        return f"def {name}(a, b) = {'; '.join(body)} end"

    # Expressions

    def atom(self, scope: _Scope) -> str:
        options = [self.literal, lambda: self.rng.choice(scope.ints)]
        if scope.top_level:
            options += [
                lambda: f"xs[{self.rng.randint(0, 2)}]",
                lambda: f"rec.{self.rng.choice('ab')}",
                lambda: "len(xs)",
            ]
        return self.rng.choice(options)()

    def int_expr(self, scope: _Scope, depth: int = 0) -> str:
        roll = self.rng.random()
        if depth >= 2 or roll < 0.4:
            return self.atom(scope)
        if roll < 0.8:
            op = self.rng.choice(["+", "-", "*", "+", "-", "//", "%"])
            return f"({self.int_expr(scope, depth + 1)} {op} {self.int_expr(scope, depth + 1)})"
        if roll < 0.9 and scope.functions:
            fn = self.rng.choice(scope.functions)
            return f"{fn}({self.int_expr(scope, depth + 1)}, {self.int_expr(scope, depth + 1)})"
        name = self.fresh("t")
        value = self.int_expr(scope, depth + 1)
        body = self.int_expr(scope.child(ints=scope.ints + [name]), depth + 1)
        return f"(let {name} = {value} in ({body} + {name}))"

    def bool_expr(self, scope: _Scope, depth: int = 0) -> str:
        roll = self.rng.random()
        if roll < 0.5:
            op = self.rng.choice(["<", "<=", "==", "!=", ">", ">="])
            return f"({self.int_expr(scope, 1)} {op} {self.int_expr(scope, 1)})"
        if roll < 0.6:
            return self.rng.choice(["true", "false"])
        if roll < 0.7 and scope.top_level:
            return f"contains(xs, {self.int_expr(scope, 1)})"
        if depth >= 1:
            return f"({self.int_expr(scope, 2)} > 0)"
        if roll < 0.85:
            op = self.rng.choice(["and", "or"])
            return f"({self.bool_expr(scope, depth + 1)} {op} {self.bool_expr(scope, depth + 1)})"
        return f"not {self.bool_expr(scope, depth + 1)}"

    # Statements

    def block(self, scope: _Scope, depth: int, size: int | None = None) -> list[str]:
        scope = scope.child()
        count = size if size is not None else self.rng.randint(1, 3)
        return [self.statement(scope, depth) for _ in range(count)]

    def statement(self, scope: _Scope, depth: int) -> str:
        if self.rng.random() < 0.02:
            return f'if {self.bool_expr(scope)} then goto raise with "boom" end'
        kinds = ["print", "print", "assign", "bind"]
        if scope.top_level:
            kinds += ["push", "setindex", "setfield"]
        if depth < 3:
            kinds += ["loop", "loop", "if", "label"]
        if scope.in_loop:
            kinds += ["escape", "escape"]
        if scope.in_function:
            kinds.append("return")
        if scope.labels:
            kinds += ["goto", "goto"]
        kind = self.rng.choice(kinds)

        if kind == "print":
            if scope.top_level and self.rng.random() < 0.2:
                return f"print({self.rng.choice(['xs', 'rec'])})"
            if self.rng.random() < 0.3:
                return f'print("n=" + str({self.int_expr(scope)}))'
            return f"print({self.int_expr(scope)})"
        if kind == "assign":
            return f"{self.rng.choice(scope.refs)} := {self.int_expr(scope)}"
        if kind == "bind":
            name = self.fresh("v")
            text = f"let {name} = {self.int_expr(scope)}"
            scope.ints.append(name)
            return text
        if kind == "push":
            return f"push(xs, {self.int_expr(scope)})"
        if kind == "setindex":
            return f"xs[{self.rng.randint(0, 2)}] := {self.int_expr(scope)}"
        if kind == "setfield":
            return f"rec.{self.rng.choice('abc')} := {self.int_expr(scope)}"
        if kind == "loop":
            counter = self.fresh("c")
            inner = scope.child(in_loop=True, ints=scope.ints + [f"!{counter}"])
            body = "; ".join(self.block(inner, depth + 1))
            bound = self.rng.randint(0, 4)
            return f"(let {counter} = ref 0 in while !{counter} < {bound} do {counter} := !{counter} + 1; {body} end)"
        if kind == "if":
            then = "; ".join(self.block(scope, depth + 1))
            if self.rng.random() < 0.5:
                return f"if {self.bool_expr(scope)} then {then} end"
            orelse = "; ".join(self.block(scope, depth + 1))
            return f"if {self.bool_expr(scope)} then {then} else {orelse} end"
        if kind == "label":
            label = self.fresh("l")
            inner = scope.child(labels=scope.labels + [label])
            body = "; ".join(self.block(inner, depth + 1) + [self.int_expr(inner)])
            return f"{self.rng.choice(scope.refs)} := (label {label}: {body} end)"
        if kind == "escape":
            jump = self.rng.choice(["break", "continue"])
            if self.rng.random() < 0.2:
                return jump
            return f"if {self.bool_expr(scope)} then {jump} end"
        if kind == "return":
            return f"if {self.bool_expr(scope)} then return {self.int_expr(scope)} end"
        label = self.rng.choice(scope.labels)
        return f"if {self.bool_expr(scope)} then goto {label} with {self.int_expr(scope)} end"


async def _compare(seed: int) -> bool:
    """Run one generated program both ways. Returns True when it ran to completion."""
    source = ProgramGenerator(seed).program()
    program = parse_program(source)

    reference = ReferenceEvaluator(program)
    expected_error = None
    expected = None
    try:
        expected = reference.run()
    except HostRuntimeError as e:
        expected_error = e

    context = f"seed {seed}:\n{source}"
    try:
        result = await run(program)
    except HostRuntimeError as error:
        assert expected_error is not None, f"interpreter raised {error!r}; {context}"
        assert type(error) is type(expected_error), context
        assert error.stdout == reference.stdout, context
        if isinstance(error, RaisedError):
            assert error.payload == expected_error.payload, context
        return False

    assert expected_error is None, f"reference raised {expected_error!r}; {context}"
    assert result.value == expected, context
    assert type(result.value) is type(expected), context
    assert result.stdout == reference.stdout, context
    assert result.globals == reference.globals, context
    assert result.heap.snapshot() == reference.heap.snapshot(), context
    return True


class TestReferenceOracle:
    """The interpreter and the reference evaluator agree on every generated program."""

    @pytest.mark.asyncio
    @pytest.mark.timeout(120)
    async def test_generated_programs_agree(self):
        """Generated programs give the same output on both interpreters."""
        completed = 0
        for seed in range(PROGRAMS):
            completed += await _compare(seed)
        # Most programs finish; the rest end in a runtime error both sides report.
        assert completed > PROGRAMS // 10

    def test_generator_is_deterministic(self):
        """The same seed generates the same program."""
        assert ProgramGenerator(7).program() == ProgramGenerator(7).program()

    def test_generated_programs_parse(self):
        """Every generated program parses."""
        for seed in range(50):
            parse_program(ProgramGenerator(seed).program())

    @pytest.mark.asyncio
    async def test_hand_written_programs_agree(self):
        """A few programs that stress unwinding through frames."""
        sources = [
            "def f(n) = while true do let k = n in while true do return k * 2 end end end f(4)",
            "let r = ref 0; r := (label l: (let c = ref 0 in while !c < 5 do c := !c + 1; "
            "if !c == 3 then goto l with !c end end); 0 end); !r",
            "let xs = [1]; let i = ref 0; while !i < 4 do i := !i + 1; if !i % 2 == 0 then continue end; "
            "push(xs, !i) end; xs",
            'print(1); label l: goto raise with "boom" end',
        ]
        for source in sources:
            program = parse_program(source)
            reference = ReferenceEvaluator(program)
            try:
                expected = reference.run()
            except RaisedError:
                with pytest.raises(RaisedError) as excinfo:
                    await run(program)
                assert excinfo.value.stdout == reference.stdout
                continue
            result = await run(program)
            assert result.value == expected, source
            assert result.stdout == reference.stdout, source
            assert result.heap.snapshot() == reference.heap.snapshot(), source
