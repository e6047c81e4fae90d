"""Commands, runtime values and the lowering from statements to commands."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Union

from .syntax import ast as A


class Label(NamedTuple):
    """An opaque instance label.

    ``uid == 0`` marks a null label; ``null_of`` then names the struct type
    (or ``"[]"`` for the null array). Fresh labels have ``uid >= 1``.
    """

    uid: int
    null_of: Optional[str] = None

    @property
    def is_null(self) -> bool:
        return self.uid == 0

    def __repr__(self) -> str:
        if self.uid == 0:
            return f"null<{self.null_of}>"
        return f"#{self.uid}"


NULL_ARRAY = Label(0, "[]")

Value = Union[int, bool, str, Label]


def null_label(struct: str) -> Label:
    return Label(0, struct)


def default_val(t: A.SynType) -> Value:
    """The null value of a syntactic type."""
    if isinstance(t, A.ArrayOf):
        return NULL_ARRAY
    if t.name in ("Nat", "Int"):
        return 0
    if t.name == "Bool":
        return False
    if t.name == "String":
        return ""
    return null_label(t.name)


def render_value(v: Value) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Label):
        return repr(v)
    if isinstance(v, str):
        return json.dumps(v)
    return str(v)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

PUSH, PUSH_THIS, RD, WR, CONS, IF, NOT, OP, RDA, WRA, ARR, ASIZE = range(12)


class Command:
    __slots__ = ()
    code = -1


@dataclass(frozen=True, eq=False, slots=True)
class Push(Command):
    value: Value
    code = PUSH

    # ``True == 1`` in Python; keep Push(true) and Push(1) apart.
    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Push)
            and type(self.value) is type(other.value)
            and self.value == other.value
        )

    def __hash__(self) -> int:
        return hash((PUSH, type(self.value).__name__, self.value))

    def __str__(self) -> str:
        return f"Push({render_value(self.value)})"


@dataclass(frozen=True, slots=True)
class PushThis(Command):
    code = PUSH_THIS

    def __str__(self) -> str:
        return "Push(this)"


@dataclass(frozen=True, slots=True)
class Rd(Command):
    var: str
    code = RD

    def __str__(self) -> str:
        return f"Rd({self.var})"


@dataclass(frozen=True, slots=True)
class Wr(Command):
    var: str
    code = WR

    def __str__(self) -> str:
        return f"Wr({self.var})"


@dataclass(frozen=True, slots=True)
class Cons(Command):
    struct: str
    arity: int
    code = CONS

    def __str__(self) -> str:
        return f"Cons({self.struct})"


@dataclass(frozen=True, slots=True)
class If(Command):
    body: tuple[Command, ...]
    # The body reversed, ready to extend a reversed command list.
    rev: tuple[Command, ...] = field(init=False, compare=False, repr=False)
    code = IF

    def __post_init__(self) -> None:
        object.__setattr__(self, "rev", tuple(reversed(self.body)))

    def __str__(self) -> str:
        return "If(" + ";".join(str(c) for c in self.body) + ")"


@dataclass(frozen=True, slots=True)
class NotCmd(Command):
    code = NOT

    def __str__(self) -> str:
        return "Not"


@dataclass(frozen=True, slots=True)
class Op(Command):
    op: str
    code = OP

    def __str__(self) -> str:
        return f"Op({self.op})"


@dataclass(frozen=True, slots=True)
class RdA(Command):
    code = RDA

    def __str__(self) -> str:
        return "RdA"


@dataclass(frozen=True, slots=True)
class WrA(Command):
    code = WRA

    def __str__(self) -> str:
        return "WrA"


@dataclass(frozen=True, slots=True)
class Arr(Command):
    elem: A.SynType
    code = ARR

    def __str__(self) -> str:
        return f"Arr({self.elem})"


@dataclass(frozen=True, slots=True)
class Asize(Command):
    code = ASIZE

    def __str__(self) -> str:
        return "Asize"


# ---------------------------------------------------------------------------
# Lowering
# ---------------------------------------------------------------------------


def interp_expr(e: A.Expr) -> list[Command]:
    """Lower an annotated expression to the commands that push its value."""
    if isinstance(e, A.Literal):
        return [Push(e.value)]
    if isinstance(e, A.Null):
        assert e.type is not None, "null must be annotated before lowering"
        return [Push(default_val(e.type))]
    if isinstance(e, A.This):
        return [PushThis()]
    if isinstance(e, A.VarChain):
        return _chain(e.segments)
    if isinstance(e, A.Not):
        return interp_expr(e.expr) + [NotCmd()]
    if isinstance(e, A.BinOp):
        return interp_expr(e.lhs) + interp_expr(e.rhs) + [Op(e.op)]
    if isinstance(e, A.Constructor):
        out: list[Command] = []
        for arg in e.args:
            out += interp_expr(arg)
        return out + [Cons(e.struct, len(e.args))]
    if isinstance(e, A.ArrayNew):
        assert e.elem is not None, "array(...) must be annotated before lowering"
        return interp_expr(e.size) + [Arr(e.elem)]
    if isinstance(e, A.ArraySize):
        return interp_expr(e.chain) + [Asize()]
    raise TypeError(f"cannot lower {e!r}")


def _chain(segments) -> list[Command]:
    out: list[Command] = [PushThis()]
    for seg in segments:
        if isinstance(seg, A.Field):
            out.append(Rd(seg.name))
        else:
            out += interp_expr(seg.index)
            out.append(RdA())
    return out


def interp_statement(s: A.Stmt) -> list[Command]:
    if isinstance(s, A.IfThen):
        assert s.orelse is None, "else branches must be desugared before lowering"
        return interp_expr(s.cond) + [If(tuple(interp_statements(s.body)))]
    if isinstance(s, A.VarDecl):
        return interp_expr(s.expr) + [PushThis(), Wr(s.name)]
    if isinstance(s, A.Update):
        segs = s.target.segments
        last = segs[-1]
        if isinstance(last, A.Index):
            return interp_expr(s.expr) + _chain(segs[:-1]) + interp_expr(last.index) + [WrA()]
        return interp_expr(s.expr) + _chain(segs[:-1]) + [Wr(last.name)]
    if isinstance(s, A.ConstructorStmt):
        return interp_expr(s.call)
    raise TypeError(f"cannot lower {s!r}")


def interp_statements(stmts) -> list[Command]:
    """Lower a statement list; lowering distributes over concatenation."""
    out: list[Command] = []
    for s in stmts:
        out += interp_statement(s)
    return out


def render(cmds, indent: int = 0) -> str:
    """Stable text form: one command per line, If bodies indented two spaces."""
    lines: list[str] = []
    _render(cmds, indent, lines)
    return "\n".join(lines)


def _render(cmds, indent: int, lines: list[str]) -> None:
    pad = "  " * indent
    for c in cmds:
        if isinstance(c, If):
            lines.append(pad + "If")
            _render(c.body, indent + 1, lines)
        else:
            lines.append(pad + str(c))


def if_depth(cmds) -> int:
    return max((1 + if_depth(c.body) for c in cmds if isinstance(c, If)), default=0)
