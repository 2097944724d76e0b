"""Public API for the host language.

This module defines runtime values, label names and the abstract syntax
shared by the parser, the interpreter and the NFI runtime.
Implementation modules import from here, not the other way around.
"""

import hashlib
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Annotated, Any, Literal, Union

from pydantic import BaseModel, ConfigDict, Field

if TYPE_CHECKING:
    from .control import ControlState
    from .env import Env
    from .heap import Heap

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1

IDENTIFIER_PATTERN = r"[A-Za-z_][A-Za-z0-9_]*"

# =============================================================================
# Values
# =============================================================================


class Addr(BaseModel):
    """Reference to a heap cell. Compared by identity of the cell it names."""

    model_config = ConfigDict(frozen=True)

    id: int = Field(ge=0)


class LabelKind(str, Enum):
    """What a label frame was installed for."""

    USER = "user-label"
    LOOP_BREAK = "loop-break"
    LOOP_CONTINUE = "loop-continue"
    FUNCTION_RETURN = "function-return"


class LabelName(BaseModel):
    """A jump target."""

    model_config = ConfigDict(frozen=True)

    name: str
    kind: LabelKind = LabelKind.USER


class LabelVal(BaseModel):
    """A label carried as a first-order value."""

    model_config = ConfigDict(frozen=True)

    label: LabelName


BREAK = LabelName(name="break", kind=LabelKind.LOOP_BREAK)
CONTINUE = LabelName(name="continue", kind=LabelKind.LOOP_CONTINUE)
RETURN = LabelName(name="return", kind=LabelKind.FUNCTION_RETURN)
RAISE = LabelName(name="raise", kind=LabelKind.USER)

RESERVED_LABELS = {
    "break": BREAK,
    "continue": CONTINUE,
    "return": RETURN,
    "raise": RAISE,
}

# Value = None (Unit) | bool | int | float | str | LabelVal | Addr
# A heap cell holds a Value, a list (List payload) or a dict (Record payload).
Value = Any


def is_immutable(value: Any) -> bool:
    """True for values that cross the NFI boundary by copy."""
    return value is None or isinstance(value, (bool, int, float, str, LabelVal))


def type_name(value: Any) -> str:
    """Host type name of a value or cell payload."""
    if value is None:
        return "Unit"
    if isinstance(value, bool):
        return "Bool"
    if isinstance(value, int):
        return "Int"
    if isinstance(value, float):
        return "Float"
    if isinstance(value, str):
        return "Str"
    if isinstance(value, LabelVal):
        return "Label"
    if isinstance(value, Addr):
        return "Ref"
    if isinstance(value, list):
        return "List"
    if isinstance(value, dict):
        return "Record"
    return type(value).__name__


# =============================================================================
# Abstract syntax
# =============================================================================


class Node(BaseModel):
    """Base class for syntax nodes. Positions are left out of the canonical serialization."""

    model_config = ConfigDict(frozen=True)

    line: int = Field(default=0, exclude=True, repr=False)
    column: int = Field(default=0, exclude=True, repr=False)


class Const(Node):
    kind: Literal["const"] = "const"
    value: None | bool | int | float | str = None


class Var(Node):
    kind: Literal["var"] = "var"
    name: str


class Let(Node):
    """``let x = e in body``: binds x in a new frame for body."""

    kind: Literal["let"] = "let"
    name: str
    value: "Expr"
    body: "Expr"


class Bind(Node):
    """``let x = e``: binds x in the current frame."""

    kind: Literal["bind"] = "bind"
    name: str
    value: "Expr"


class Seq(Node):
    kind: Literal["seq"] = "seq"
    items: tuple["Expr", ...]


class If(Node):
    kind: Literal["if"] = "if"
    cond: "Expr"
    then: "Expr"
    orelse: "Expr | None" = None


class While(Node):
    kind: Literal["while"] = "while"
    cond: "Expr"
    body: "Expr"


class BinOp(Node):
    kind: Literal["binop"] = "binop"
    op: str
    left: "Expr"
    right: "Expr"


class UnaryOp(Node):
    kind: Literal["unary"] = "unary"
    op: Literal["-", "not"]
    operand: "Expr"


class NewRef(Node):
    """``ref e``"""

    kind: Literal["ref"] = "ref"
    value: "Expr"


class ReadRef(Node):
    """``!e``"""

    kind: Literal["deref"] = "deref"
    ref: "Expr"


class WriteRef(Node):
    """``a := e``"""

    kind: Literal["setref"] = "setref"
    ref: "Expr"
    value: "Expr"


class WriteIndex(Node):
    """``a[k] := e``"""

    kind: Literal["setindex"] = "setindex"
    target: "Expr"
    index: "Expr"
    value: "Expr"


class Index(Node):
    kind: Literal["index"] = "index"
    target: "Expr"
    index: "Expr"


class LabelBlock(Node):
    """``label name: e end``"""

    kind: Literal["label"] = "label"
    label: LabelName
    body: "Expr"


class GotoExpr(Node):
    """``goto name [with e]``"""

    kind: Literal["goto"] = "goto"
    label: LabelName
    payload: "Expr | None" = None


class Call(Node):
    """Call of a builtin or a top-level function."""

    kind: Literal["call"] = "call"
    name: str
    args: tuple["Expr", ...] = ()


class ListLit(Node):
    kind: Literal["list"] = "list"
    items: tuple["Expr", ...] = ()


class RecordLit(Node):
    kind: Literal["record"] = "record"
    fields: tuple[tuple[str, "Expr"], ...] = ()


class NaturalBlock(BaseModel):
    """Natural-language instructions with their declared interface.

    ``inputs`` come from ``<x>`` markers, ``outputs`` from ``<:x>`` markers,
    both in order of first appearance.
    """

    model_config = ConfigDict(frozen=True)

    text: str
    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()
    block_id: str = Field(default="", exclude=True)


class Natural(Node):
    kind: Literal["natural"] = "natural"
    block: NaturalBlock


Expr = Annotated[
    Union[
        Const,
        Var,
        Let,
        Bind,
        Seq,
        If,
        While,
        BinOp,
        UnaryOp,
        NewRef,
        ReadRef,
        WriteRef,
        WriteIndex,
        Index,
        LabelBlock,
        GotoExpr,
        Call,
        ListLit,
        RecordLit,
        Natural,
    ],
    Field(discriminator="kind"),
]


class FunctionDef(Node):
    """Top-level first-order function."""

    kind: Literal["def"] = "def"
    name: str
    params: tuple[str, ...] = ()
    body: Expr


class Program(BaseModel):
    """A parsed program.

    ``blocks`` and ``block_labels`` index the natural blocks by id; they are
    derived data and excluded from the canonical serialization.
    """

    model_config = ConfigDict(frozen=True)

    functions: tuple[FunctionDef, ...] = ()
    body: Expr = Field(default_factory=Const)
    blocks: dict[str, NaturalBlock] = Field(default_factory=dict, exclude=True)
    block_labels: dict[str, tuple[LabelName, ...]] = Field(default_factory=dict, exclude=True)

    def digest(self) -> str:
        """SHA-256 over the canonical AST serialization (no source positions)."""
        return hashlib.sha256(self.model_dump_json().encode()).hexdigest()

    def function(self, name: str) -> FunctionDef | None:
        for fn in self.functions:
            if fn.name == name:
                return fn
        return None


for _model in (
    Let,
    Bind,
    Seq,
    If,
    While,
    BinOp,
    UnaryOp,
    NewRef,
    ReadRef,
    WriteRef,
    WriteIndex,
    Index,
    LabelBlock,
    GotoExpr,
    Call,
    ListLit,
    RecordLit,
    FunctionDef,
    Program,
):
    _model.model_rebuild()


# =============================================================================
# Results and state
# =============================================================================


@dataclass
class RunResult:
    """Outcome of running a program to completion."""

    value: Any
    stdout: list[str]
    traces: list[Any] = field(default_factory=list)  # TraceRecord per natural-block session
    effect_count: int = 0
    agent_invocations: int = 0
    wall_time_s: float = 0.0
    globals: dict[str, Any] = field(default_factory=dict)
    heap: "Heap | None" = None


class HostState(ABC):
    """The view of a running interpreter that NFI handlers drive."""

    env: "Env"
    heap: "Heap"
    control: "ControlState"
    program: Program
    traces: list[Any]  # TraceRecord per finished or failed session
    effect_count: int
    agent_invocations: int

    @abstractmethod
    async def evaluate_detached(self, expr: Any, bindings: dict[str, Any]) -> Any:
        """
        Evaluate an expression in a fresh scope.

        The scope holds only ``bindings``, no labels are active, and I/O
        builtins and natural blocks are refused. The heap is the live heap.

        Args:
            expr: Parsed expression.
            bindings: Variables visible to the expression.

        Returns:
            The expression's value.
        """
