"""Removal of ``else`` branches.

A chain ``if a {A} else if b {B} else {E}`` becomes::

    Bool g := a;
    if g {A}
    if !g { g := b; if g {B} }
    if !g {E}

One fresh Boolean per chain. Each condition is evaluated at most once and only
when every earlier condition was false, so clause bodies that change state read
by later conditions cannot re-trigger the chain.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Iterator

from . import ast as A


def _names_in_expr(e: A.Expr) -> Iterator[str]:
    if isinstance(e, A.VarChain):
        for seg in e.segments:
            if isinstance(seg, A.Field):
                yield seg.name
            else:
                yield from _names_in_expr(seg.index)
    elif isinstance(e, A.ArraySize):
        yield from _names_in_expr(e.chain)
    elif isinstance(e, A.Not):
        yield from _names_in_expr(e.expr)
    elif isinstance(e, A.BinOp):
        yield from _names_in_expr(e.lhs)
        yield from _names_in_expr(e.rhs)
    elif isinstance(e, A.Constructor):
        for a in e.args:
            yield from _names_in_expr(a)
    elif isinstance(e, A.ArrayNew):
        yield from _names_in_expr(e.size)


def _names_in_stmts(stmts) -> Iterator[str]:
    for s in stmts:
        if isinstance(s, A.IfThen):
            yield from _names_in_expr(s.cond)
            yield from _names_in_stmts(s.body)
            if s.orelse:
                yield from _names_in_stmts(s.orelse)
        elif isinstance(s, A.VarDecl):
            yield s.name
            yield from _names_in_expr(s.expr)
        elif isinstance(s, A.Update):
            yield from _names_in_expr(s.target)
            yield from _names_in_expr(s.expr)
        elif isinstance(s, A.ConstructorStmt):
            yield from _names_in_expr(s.call)


class _Fresh:
    def __init__(self, taken: set[str]):
        self.taken = taken
        self.n = 0

    def __call__(self) -> str:
        while True:
            self.n += 1
            name = f"_else{self.n}"
            if name not in self.taken:
                self.taken.add(name)
                return name


def _block(stmts: tuple[A.Stmt, ...], fresh: _Fresh) -> tuple[A.Stmt, ...]:
    out: list[A.Stmt] = []
    for s in stmts:
        out.extend(_stmt(s, fresh))
    return tuple(out)


def _stmt(s: A.Stmt, fresh: _Fresh) -> list[A.Stmt]:
    if not isinstance(s, A.IfThen):
        return [s]
    if s.orelse is None:
        return [replace(s, body=_block(s.body, fresh))]
    name = fresh()
    guard = A.VarChain((A.Field(name),), s.pos)
    out: list[A.Stmt] = [
        A.VarDecl(A.BOOL, name, s.cond, s.pos),
        A.IfThen(guard, _block(s.body, fresh), None, s.pos),
    ]
    rest = s.orelse
    while rest is not None:
        if len(rest) == 1 and isinstance(rest[0], A.IfThen):
            clause = rest[0]
            inner = (
                A.Update(guard, clause.cond, clause.pos),
                A.IfThen(guard, _block(clause.body, fresh), None, clause.pos),
            )
            out.append(A.IfThen(A.Not(guard, clause.pos), inner, None, clause.pos))
            rest = clause.orelse
        else:
            out.append(A.IfThen(A.Not(guard, s.pos), _block(rest, fresh), None, s.pos))
            rest = None
    return out


def has_else(stmts) -> bool:
    for s in stmts:
        if isinstance(s, A.IfThen):
            if s.orelse is not None or has_else(s.body):
                return True
    return False


def desugar(program: A.Program) -> A.Program:
    """Return ``program`` with every else-chain replaced by guarded ifs."""
    structs = []
    for sdef in program.structs:
        taken = set(sdef.param_names)
        for _, body in sdef.steps:
            taken.update(_names_in_stmts(body))
        fresh = _Fresh(taken)
        steps = tuple((name, _block(body, fresh)) for name, body in sdef.steps)
        structs.append(replace(sdef, steps=steps))
    return A.Program(tuple(structs), program.schedule)
