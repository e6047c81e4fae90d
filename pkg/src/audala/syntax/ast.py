"""Abstract syntax for AuDaLa programs.

All nodes are immutable. Source positions are carried for diagnostics but are
excluded from equality, so two parses of equivalent text compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class Pos:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


def _pos() -> Optional[Pos]:
    return field(default=None, compare=False, repr=False)


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

PRIMITIVES = ("Nat", "Int", "Bool", "String")


@dataclass(frozen=True)
class Named:
    """A primitive type or a reference to a declared struct."""

    name: str

    @property
    def is_struct(self) -> bool:
        return self.name not in PRIMITIVES

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class ArrayOf:
    elem: "SynType"

    def __str__(self) -> str:
        return f"Array({self.elem})"


SynType = Union[Named, ArrayOf]

NAT = Named("Nat")
INT = Named("Int")
BOOL = Named("Bool")
STRING = Named("String")


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Literal:
    value: Union[int, bool, str]
    type: Optional[SynType] = None
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class This:
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Null:
    type: Optional[SynType] = None
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Field:
    name: str


@dataclass(frozen=True)
class Index:
    index: "Expr"


Segment = Union[Field, Index]


@dataclass(frozen=True)
class VarChain:
    """``x.y[e].z``; the first segment is always a :class:`Field`."""

    segments: tuple[Segment, ...]
    pos: Optional[Pos] = _pos()

    @property
    def head(self) -> str:
        first = self.segments[0]
        assert isinstance(first, Field)
        return first.name


@dataclass(frozen=True)
class Not:
    expr: "Expr"
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class BinOp:
    op: str
    lhs: "Expr"
    rhs: "Expr"
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Constructor:
    struct: str
    args: tuple["Expr", ...]
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class ArrayNew:
    size: "Expr"
    elem: Optional[SynType] = None
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class ArraySize:
    chain: VarChain
    pos: Optional[Pos] = _pos()


Expr = Union[Literal, This, Null, VarChain, Not, BinOp, Constructor, ArrayNew, ArraySize]


# ---------------------------------------------------------------------------
# Statements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IfThen:
    """``if c then { body }``, optionally followed by an else branch.

    ``orelse`` is ``None`` for a plain if-then. An ``else if`` is stored as a
    one-element tuple holding the nested :class:`IfThen`.
    """

    cond: Expr
    body: tuple["Stmt", ...]
    orelse: Optional[tuple["Stmt", ...]] = None
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class VarDecl:
    type: SynType
    name: str
    expr: Expr
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Update:
    target: VarChain
    expr: Expr
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class ConstructorStmt:
    call: Constructor
    pos: Optional[Pos] = _pos()


Stmt = Union[IfThen, VarDecl, Update, ConstructorStmt]


# ---------------------------------------------------------------------------
# Schedule and program
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Call:
    """A global step call (``struct is None``) or a local call ``S.step``."""

    step: str
    struct: Optional[str] = None
    pos: Optional[Pos] = _pos()

    def __str__(self) -> str:
        return self.step if self.struct is None else f"{self.struct}.{self.step}"


@dataclass(frozen=True)
class Fix:
    """A fixpoint; ``params`` is set for a parameter-specific fixpoint."""

    body: tuple["SchedItem", ...]
    params: Optional[tuple[str, ...]] = None
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Iter:
    steps: tuple[str, ...]
    pos: Optional[Pos] = _pos()


SchedItem = Union[Call, Fix, Iter]


@dataclass(frozen=True)
class StructDef:
    name: str
    params: tuple[tuple[str, SynType], ...]
    steps: tuple[tuple[str, tuple[Stmt, ...]], ...]
    pos: Optional[Pos] = _pos()

    def step(self, name: str) -> Optional[tuple[Stmt, ...]]:
        for step_name, body in self.steps:
            if step_name == name:
                return body
        return None

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.params)


@dataclass(frozen=True)
class Program:
    structs: tuple[StructDef, ...]
    schedule: tuple[SchedItem, ...]

    def struct(self, name: str) -> Optional[StructDef]:
        for s in self.structs:
            if s.name == name:
                return s
        return None


def walk_schedule(items: tuple[SchedItem, ...]):
    """Yield every schedule item, descending into fixpoints."""
    for item in items:
        yield item
        if isinstance(item, Fix):
            yield from walk_schedule(item.body)
