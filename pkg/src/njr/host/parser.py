"""Parser for the host language.

Source text is parsed with a lark LALR grammar into the pydantic syntax
tree of ``public_api``, then checked statically: goto targets must be
enclosed by a matching label, calls must name a builtin or a top-level
function with the right arity, and every natural block is indexed with
the labels visible at it.
"""

import json
import logging
import math
import re
import textwrap
from functools import lru_cache
from pathlib import Path
from typing import Any

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedInput, VisitError

from ..errors import ParseError, StoreIO, UnboundGotoTarget, UnknownBlock
from .builtins import BUILTIN_ARITY
from .public_api import (
    BREAK,
    CONTINUE,
    IDENTIFIER_PATTERN,
    INT_MAX,
    RESERVED_LABELS,
    RETURN,
    BinOp,
    Bind,
    Call,
    Const,
    FunctionDef,
    GotoExpr,
    If,
    Index,
    LabelBlock,
    LabelKind,
    LabelName,
    Let,
    ListLit,
    Natural,
    NaturalBlock,
    NewRef,
    Node,
    Program,
    ReadRef,
    RecordLit,
    Seq,
    UnaryOp,
    Var,
    While,
    WriteIndex,
    WriteRef,
)

logger = logging.getLogger("njr.parser")

GRAMMAR = r'''
    program: fundef* [seq]

    fundef: "def" NAME "(" [params] ")" "=" seq "end"
    params: NAME ("," NAME)*

    seq: stmt (";" stmt)* ";"?

    ?stmt: "let" NAME "=" stmt "in" seq          -> let_in
         | "let" NAME "=" stmt                   -> bind
         | "if" seq "then" seq "else" seq "end"  -> if_else
         | "if" seq "then" seq "end"             -> if_then
         | "while" seq "do" seq "end"            -> while_
         | "label" NAME ":" seq "end"            -> label_block
         | GOTO NAME ["with" expr]               -> goto
         | BREAK                                 -> break_
         | CONTINUE                              -> continue_
         | RETURN [expr]                         -> return_
         | expr ":=" expr                        -> assign
         | expr

    ?expr: or_expr

    ?or_expr: or_expr "or" and_expr    -> or_
            | and_expr

    ?and_expr: and_expr "and" not_expr -> and_
             | not_expr

    ?not_expr: "not" not_expr          -> not_
             | comparison

    ?comparison: sum "==" sum          -> eq
               | sum "!=" sum          -> ne
               | sum "<" sum           -> lt
               | sum "<=" sum          -> le
               | sum ">" sum           -> gt
               | sum ">=" sum          -> ge
               | sum

    ?sum: sum "+" product              -> add
        | sum "-" product              -> sub
        | product

    ?product: product "*" unary        -> mul
            | product "/" unary        -> div
            | product "//" unary       -> floordiv
            | product "%" unary        -> mod
            | unary

    ?unary: "-" unary                  -> neg
          | "!" unary                  -> deref
          | "ref" unary                -> ref
          | postfix

    ?postfix: postfix "[" expr "]"     -> index
            | postfix "." NAME         -> field
            | atom

    ?atom: INT                         -> int_
         | FLOAT                       -> float_
         | STRING                      -> string
         | "true"                      -> true
         | "false"                     -> false
         | "(" ")"                     -> unit
         | "(" seq ")"                 -> paren
         | NAME "(" [args] ")"         -> call
         | NAME                        -> var
         | "[" [args] "]"              -> list_
         | "{" [fields] "}"            -> record
         | NATURAL_KW NATURAL_TEXT     -> natural

    args: expr ("," expr)*
    fields: field_item ("," field_item)*
    field_item: (NAME | STRING) ":" expr

    GOTO: "goto"
    BREAK: "break"
    CONTINUE: "continue"
    RETURN: "return"
    NATURAL_KW: "natural"

    NAME: /[A-Za-z_][A-Za-z0-9_]*/
    INT: /[0-9]+/
    FLOAT.2: /[0-9]+\.[0-9]+([eE][+-]?[0-9]+)?/
    STRING: /"(\\.|[^"\\\n])*"/
    NATURAL_TEXT.3: /"""[\s\S]*?"""/
    COMMENT: /#[^\n]*/

    %import common.WS
    %ignore WS
    %ignore COMMENT
'''

MARKER_PATTERN = re.compile(r"<(:?)(" + IDENTIFIER_PATTERN + r")>")


@lru_cache(maxsize=1)
def _parser() -> Lark:
    return Lark(GRAMMAR, start=["program", "seq"], parser="lalr")


def _at(token: Token) -> dict[str, int]:
    return {"line": token.line or 0, "column": token.column or 0}


def _label_for(name: str) -> LabelName:
    return RESERVED_LABELS.get(name) or LabelName(name=name, kind=LabelKind.USER)


def natural_block(raw: str, line: int, column: int) -> NaturalBlock:
    """Build a NaturalBlock from the text between (and including) the triple quotes."""
    body = textwrap.dedent(raw[3:-3]).strip()
    inputs: list[str] = []
    outputs: list[str] = []
    for colon, name in MARKER_PATTERN.findall(body):
        target = outputs if colon else inputs
        if name not in target:
            target.append(name)
    text = MARKER_PATTERN.sub(lambda m: m.group(2), body)
    return NaturalBlock(
        text=text,
        inputs=tuple(inputs),
        outputs=tuple(outputs),
        block_id=f"{line}:{column}",
    )


def _binop(op: str):
    def build(self, left, right):
        return BinOp(op=op, left=left, right=right)

    return build


@v_args(inline=True)
class _ToAst(Transformer):
    """Turns the lark parse tree into syntax nodes."""

    def program(self, *children):
        *functions, body = children
        return list(functions), body

    def fundef(self, name, params, body):
        return FunctionDef(name=str(name), params=tuple(params or ()), body=body, **_at(name))

    def params(self, *names):
        return [str(n) for n in names]

    def seq(self, *items):
        if len(items) == 1:
            return items[0]
        return Seq(items=tuple(items))

    def let_in(self, name, value, body):
        return Let(name=str(name), value=value, body=body, **_at(name))

    def bind(self, name, value):
        return Bind(name=str(name), value=value, **_at(name))

    def if_else(self, cond, then, orelse):
        return If(cond=cond, then=then, orelse=orelse)

    def if_then(self, cond, then):
        return If(cond=cond, then=then)

    def while_(self, cond, body):
        return While(cond=cond, body=body)

    def label_block(self, name, body):
        if str(name) in RESERVED_LABELS:
            raise ParseError(f"'{name}' is reserved and cannot name a label", name.line, name.column)
        return LabelBlock(label=LabelName(name=str(name)), body=body, **_at(name))

    def goto(self, keyword, name, payload):
        return GotoExpr(label=_label_for(str(name)), payload=payload, **_at(name))

    def break_(self, keyword):
        return GotoExpr(label=BREAK, **_at(keyword))

    def continue_(self, keyword):
        return GotoExpr(label=CONTINUE, **_at(keyword))

    def return_(self, keyword, payload):
        return GotoExpr(label=RETURN, payload=payload, **_at(keyword))

    def assign(self, target, value):
        if isinstance(target, Index):
            return WriteIndex(target=target.target, index=target.index, value=value)
        return WriteRef(ref=target, value=value)

    or_ = _binop("or")
    and_ = _binop("and")
    eq = _binop("==")
    ne = _binop("!=")
    lt = _binop("<")
    le = _binop("<=")
    gt = _binop(">")
    ge = _binop(">=")
    add = _binop("+")
    sub = _binop("-")
    mul = _binop("*")
    div = _binop("/")
    floordiv = _binop("//")
    mod = _binop("%")

    def not_(self, operand):
        return UnaryOp(op="not", operand=operand)

    def neg(self, operand):
        return UnaryOp(op="-", operand=operand)

    def deref(self, ref):
        return ReadRef(ref=ref)

    def ref(self, value):
        return NewRef(value=value)

    def index(self, target, index):
        return Index(target=target, index=index)

    def field(self, target, name):
        return Index(target=target, index=Const(value=str(name)))

    def int_(self, token):
        value = int(token)
        if value > INT_MAX:
            raise ParseError(f"integer literal {token} does not fit in 64 bits", token.line, token.column)
        return Const(value=value)

    def float_(self, token):
        value = float(token)
        if not math.isfinite(value):
            raise ParseError(f"float literal {token} is not finite", token.line, token.column)
        return Const(value=value)

    def string(self, token):
        return Const(value=_decode_string(token))

    def true(self):
        return Const(value=True)

    def false(self):
        return Const(value=False)

    def unit(self):
        return Const(value=None)

    def paren(self, inner):
        return inner

    def call(self, name, args):
        return Call(name=str(name), args=tuple(args or ()), **_at(name))

    def var(self, name):
        return Var(name=str(name), **_at(name))

    def list_(self, items):
        return ListLit(items=tuple(items or ()))

    def record(self, fields):
        return RecordLit(fields=tuple(fields or ()))

    def args(self, *items):
        return list(items)

    def fields(self, *items):
        return list(items)

    def field_item(self, key, value):
        name = _decode_string(key) if key.type == "STRING" else str(key)
        return (name, value)

    def natural(self, keyword, text):
        block = natural_block(str(text), keyword.line, keyword.column)
        return Natural(block=block, **_at(keyword))


def _decode_string(token: Token) -> str:
    try:
        return json.loads(str(token), strict=False)
    except json.JSONDecodeError:
        raise ParseError(f"invalid string literal {token}", token.line, token.column) from None


# =============================================================================
# Static checks
# =============================================================================


class _Context:
    """What is lexically visible at a point in the program."""

    def __init__(self, in_loop: bool = False, in_function: bool = False, labels: tuple[LabelName, ...] = ()):
        self.in_loop = in_loop
        self.in_function = in_function
        self.labels = labels

    def visible(self) -> tuple[LabelName, ...]:
        found: list[LabelName] = []
        if self.in_loop:
            found += [BREAK, CONTINUE]
        if self.in_function:
            found.append(RETURN)
        found += reversed(self.labels)
        return tuple(found)


class _Checker:
    """Walks a syntax tree, validating gotos and calls and indexing natural blocks."""

    def __init__(self, functions: dict[str, FunctionDef], allow_natural: bool = True):
        self.functions = functions
        self.allow_natural = allow_natural
        self.blocks: dict[str, NaturalBlock] = {}
        self.block_labels: dict[str, tuple[LabelName, ...]] = {}

    def visit(self, node: Any, ctx: _Context) -> None:
        if isinstance(node, While):
            self.visit(node.cond, ctx)
            self.visit(node.body, _Context(True, ctx.in_function, ctx.labels))
            return
        if isinstance(node, LabelBlock):
            self.visit(node.body, _Context(ctx.in_loop, ctx.in_function, ctx.labels + (node.label,)))
            return
        if isinstance(node, GotoExpr):
            self._check_goto(node, ctx)
        elif isinstance(node, Call):
            self._check_call(node)
        elif isinstance(node, Natural):
            self._index_block(node, ctx)
            return
        for child in _children(node):
            self.visit(child, ctx)

    def _check_goto(self, node: GotoExpr, ctx: _Context) -> None:
        label = node.label
        if label.kind in (LabelKind.LOOP_BREAK, LabelKind.LOOP_CONTINUE):
            if node.payload is not None:
                raise ParseError(f"'{label.name}' takes no payload", node.line, node.column)
            bound = ctx.in_loop
        elif label.kind == LabelKind.FUNCTION_RETURN:
            bound = ctx.in_function
        elif label.name == "raise":
            bound = True
        else:
            bound = label in ctx.labels
        if not bound:
            raise UnboundGotoTarget(f"goto '{label.name}' has no enclosing label", node.line, node.column)

    def _check_call(self, node: Call) -> None:
        fn = self.functions.get(node.name)
        if fn is not None:
            arity = len(fn.params)
        elif node.name in BUILTIN_ARITY:
            arity = BUILTIN_ARITY[node.name]
        else:
            raise ParseError(f"unknown function '{node.name}'", node.line, node.column)
        if len(node.args) != arity:
            raise ParseError(f"'{node.name}' takes {arity} argument(s), got {len(node.args)}", node.line, node.column)

    def _index_block(self, node: Natural, ctx: _Context) -> None:
        if not self.allow_natural:
            raise ParseError("natural blocks cannot appear here", node.line, node.column)
        self.blocks[node.block.block_id] = node.block
        self.block_labels[node.block.block_id] = ctx.visible()


def _children(node: Any):
    """Direct child syntax nodes of a node, in field order."""
    for name in type(node).model_fields:
        if name in ("line", "column", "kind"):
            continue
        value = getattr(node, name)
        if isinstance(value, Node):
            yield value
        elif isinstance(value, tuple):
            for item in value:
                if isinstance(item, Node):
                    yield item
                elif isinstance(item, tuple):
                    yield from (part for part in item if isinstance(part, Node))


def _parse_tree(source: str, start: str) -> Any:
    try:
        tree = _parser().parse(source, start=start)
    except UnexpectedInput as e:
        line = max(getattr(e, "line", 0) or 0, 0)
        column = max(getattr(e, "column", 0) or 0, 0)
        raise ParseError(f"syntax error: {_describe(e)}", line, column) from None
    try:
        return _ToAst().transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, ParseError):
            raise e.orig_exc from None
        raise


def _describe(error: UnexpectedInput) -> str:
    token = getattr(error, "token", None)
    if token is not None:
        return f"unexpected {token.type} {str(token)!r}"
    char = getattr(error, "char", None)
    if char is not None:
        return f"unexpected character {char!r}"
    return "unexpected end of input"


# =============================================================================
# Public operations
# =============================================================================


def parse_program(source: str) -> Program:
    """
    Parse and statically check a program.

    Args:
        source: Program text.

    Returns:
        The Program, with natural blocks indexed by id.

    Raises:
        ParseError: On syntax errors, bad calls or payloads on loop labels.
        UnboundGotoTarget: When a goto has no enclosing label.
    """
    functions_list, body = _parse_tree(source, "program")
    functions: dict[str, FunctionDef] = {}
    for fn in functions_list:
        if fn.name in functions or fn.name in BUILTIN_ARITY:
            raise ParseError(f"function '{fn.name}' is already defined", fn.line, fn.column)
        if len(set(fn.params)) != len(fn.params):
            raise ParseError(f"function '{fn.name}' repeats a parameter", fn.line, fn.column)
        functions[fn.name] = fn
    body = body if body is not None else Const()

    checker = _Checker(functions)
    for fn in functions.values():
        checker.visit(fn.body, _Context(in_function=True))
    checker.visit(body, _Context())

    program = Program(
        functions=tuple(functions.values()),
        body=body,
        blocks=checker.blocks,
        block_labels=checker.block_labels,
    )
    logger.debug(f"Parsed program with {len(functions)} function(s) and {len(checker.blocks)} natural block(s)")
    return program


def parse_expression(source: str, program: Program | None = None) -> Any:
    """
    Parse a host expression evaluated on behalf of natural code.

    Gotos must target labels inside the expression itself and natural
    blocks are refused. Calls may name the program's functions.
    """
    expr = _parse_tree(source, "seq")
    functions = {fn.name: fn for fn in program.functions} if program else {}
    _Checker(functions, allow_natural=False).visit(expr, _Context())
    return expr


def enclosing_labels(program: Program, block_id: str) -> tuple[LabelName, ...]:
    """Labels lexically visible at a natural block: loop labels, return, then user labels innermost first."""
    if block_id not in program.block_labels:
        raise UnknownBlock(f"no natural block with id {block_id}")
    return program.block_labels[block_id]


def load_program(path: str | Path) -> Program:
    """Read and parse a program file. Unreadable files raise StoreIO."""
    path = Path(path)
    try:
        source = path.read_text(encoding="utf-8")
    except OSError as e:
        raise StoreIO(f"cannot read program {path}: {e}") from e
    return parse_program(source)
