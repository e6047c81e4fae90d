"""Well-formedness checking and type annotation.

The checker enforces the six numbered well-formedness rules plus a minimal
type discipline: operator, parameter and constructor signatures, Boolean
conditions, assignment compatibility and array-index typing. On success it
returns a :class:`ValidatedProgram` whose AST has every literal and ``null``
annotated with a type, ``X.s`` on arrays rewritten to :class:`ArraySize`, and
every ``else`` chain desugared.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Iterable, Optional

from . import ast as A
from .desugar import desugar
from .errors import Diagnostic, WellFormednessError
from .parser import parse_program

_ARITH = {"+", "-", "*", "/", "%"}
_REL = {"<", "<=", ">", ">="}
_EQ = {"=", "!="}
_BOOL_OPS = {"&&", "||"}


def _numeric(t: Optional[A.SynType]) -> bool:
    return t == A.NAT or t == A.INT


def assignable(target: Optional[A.SynType], actual: Optional[A.SynType]) -> bool:
    """Whether a value of type ``actual`` may be stored where ``target`` is expected."""
    if target is None or actual is None:
        return True
    if target == actual:
        return True
    return target == A.INT and actual == A.NAT


class ValidatedProgram:
    """A well-formed, annotated and desugared program plus lookup tables."""

    def __init__(self, program: A.Program, extensions: frozenset[str]):
        self.program = program
        self.extensions = extensions
        self.structs: dict[str, A.StructDef] = {s.name: s for s in program.structs}
        self.param_types: dict[str, dict[str, A.SynType]] = {
            s.name: dict(s.params) for s in program.structs
        }
        self.steps: dict[str, dict[str, tuple[A.Stmt, ...]]] = {
            s.name: dict(s.steps) for s in program.structs
        }

    @property
    def schedule(self) -> tuple[A.SchedItem, ...]:
        return self.program.schedule

    def params(self, struct: str) -> tuple[str, ...]:
        return self.structs[struct].param_names

    def all_params(self) -> set[str]:
        return {p for s in self.program.structs for p in s.param_names}


class _Checker:
    def __init__(self, program: A.Program, extensions: frozenset[str]):
        self.prog = program
        self.ext = extensions
        self.errors: list[Diagnostic] = []
        self.structs: dict[str, A.StructDef] = {}
        for s in program.structs:
            if s.name in self.structs:
                self.err("type", f"struct {s.name!r} is declared more than once", s.pos)
            else:
                self.structs[s.name] = s
        # Per-step state.
        self.current: Optional[A.StructDef] = None
        self.params: dict[str, A.SynType] = {}
        self.scopes: list[dict[str, A.SynType]] = []
        self.step_locals: set[str] = set()

    def err(self, rule: str, message: str, pos: Optional[A.Pos]) -> None:
        self.errors.append(Diagnostic.at(rule, message, pos))

    # -- declarations --------------------------------------------------------

    def check(self) -> A.Program:
        structs = tuple(self.struct(s) for s in self.prog.structs)
        self.schedule(self.prog.schedule)
        return A.Program(structs, self.prog.schedule)

    def resolve_type(self, t: A.SynType, pos: Optional[A.Pos]) -> None:
        if isinstance(t, A.ArrayOf):
            if "arrays" not in self.ext:
                self.err("extension", "Array types require --ext arrays", pos)
            self.resolve_type(t.elem, pos)
        elif t.is_struct and t.name not in self.structs:
            self.err("type", f"unknown type {t.name!r}", pos)

    def struct(self, s: A.StructDef) -> A.StructDef:
        self.current = s
        self.params = {}
        for name, typ in s.params:
            if name in self.params:
                self.err("rule-3", f"parameter {name!r} is declared more than once in struct {s.name!r}", s.pos)
            else:
                self.params[name] = typ
            self.resolve_type(typ, s.pos)
        seen: set[str] = set()
        steps = []
        for name, body in s.steps:
            if name in seen:
                self.err("rule-2", f"step {name!r} is declared more than once in struct {s.name!r}", s.pos)
            seen.add(name)
            self.scopes = [{}]
            self.step_locals = set(_declared_names(body))
            steps.append((name, self.block(body)))
        self.current = None
        return replace(s, steps=tuple(steps))

    # -- statements ----------------------------------------------------------

    def lookup_local(self, name: str) -> Optional[A.SynType]:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return None

    def block(self, stmts: tuple[A.Stmt, ...]) -> tuple[A.Stmt, ...]:
        self.scopes.append({})
        try:
            return tuple(self.stmt(s) for s in stmts)
        finally:
            self.scopes.pop()

    def stmt(self, s: A.Stmt) -> A.Stmt:
        if isinstance(s, A.IfThen):
            cond, ct = self.expr(s.cond, A.BOOL)
            if ct is not None and ct != A.BOOL:
                self.err("type", f"if-condition has type {ct}, expected Bool", s.pos)
            body = self.block(s.body)
            orelse = self.block(s.orelse) if s.orelse is not None else None
            return replace(s, cond=cond, body=body, orelse=orelse)
        if isinstance(s, A.VarDecl):
            self.resolve_type(s.type, s.pos)
            expr, et = self.expr(s.expr, s.type)
            if not assignable(s.type, et):
                self.err("type", f"cannot initialise {s.type} variable {s.name!r} with a value of type {et}", s.pos)
            if s.name in self.params:
                self.err("rule-4", f"local variable {s.name!r} shadows a parameter of struct {self.current.name!r}", s.pos)
            elif self.lookup_local(s.name) is not None:
                self.err("rule-5", f"variable {s.name!r} is already declared; use an update instead", s.pos)
            self.scopes[-1][s.name] = s.type
            return replace(s, expr=expr)
        if isinstance(s, A.Update):
            target, tt = self.chain(s.target, lvalue=True)
            if isinstance(target, A.ArraySize):
                self.err("type", "cannot assign to an array size", s.pos)
                tt = None
            expr, et = self.expr(s.expr, tt)
            if not assignable(tt, et):
                self.err("type", f"cannot assign a value of type {et} to a target of type {tt}", s.pos)
            return replace(s, target=target, expr=expr)
        if isinstance(s, A.ConstructorStmt):
            call, _ = self.expr(s.call, None)
            return replace(s, call=call)
        raise TypeError(f"unknown statement {s!r}")

    # -- expressions ---------------------------------------------------------

    def expr(self, e: A.Expr, expected: Optional[A.SynType]) -> tuple[A.Expr, Optional[A.SynType]]:
        if isinstance(e, A.Literal):
            if isinstance(e.value, bool):
                return replace(e, type=A.BOOL), A.BOOL
            if isinstance(e.value, int):
                t = A.NAT if e.value >= 0 else A.INT
                return replace(e, type=t), t
            return replace(e, type=A.STRING), A.STRING
        if isinstance(e, A.This):
            return e, A.Named(self.current.name)
        if isinstance(e, A.Null):
            if expected is None:
                self.err("type", "cannot infer the type of null here", e.pos)
                return e, None
            return replace(e, type=expected), expected
        if isinstance(e, A.VarChain):
            return self.chain(e, lvalue=False)
        if isinstance(e, A.ArraySize):
            return self.chain(A.VarChain(e.chain.segments + (A.Field("s"),), e.pos), lvalue=False)
        if isinstance(e, A.Not):
            inner, t = self.expr(e.expr, A.BOOL)
            if t is not None and t != A.BOOL:
                self.err("type", f"'!' applied to {t}, expected Bool", e.pos)
            return replace(e, expr=inner), A.BOOL
        if isinstance(e, A.BinOp):
            return self.binop(e)
        if isinstance(e, A.Constructor):
            return self.constructor(e)
        if isinstance(e, A.ArrayNew):
            size, st = self.expr(e.size, A.NAT)
            if st is not None and st != A.NAT:
                self.err("type", f"array size has type {st}, expected Nat", e.pos)
            if isinstance(size, A.Literal) and isinstance(size.value, int) and size.value < 1:
                self.err("type", "array size must be at least 1", e.pos)
            if not isinstance(expected, A.ArrayOf):
                self.err("type", "cannot infer the element type of array(...) here", e.pos)
                return replace(e, size=size), None
            return replace(e, size=size, elem=expected.elem), expected
        raise TypeError(f"unknown expression {e!r}")

    def binop(self, e: A.BinOp) -> tuple[A.Expr, Optional[A.SynType]]:
        op = e.op
        if op in _BOOL_OPS:
            lhs, lt = self.expr(e.lhs, A.BOOL)
            rhs, rt = self.expr(e.rhs, A.BOOL)
            for t in (lt, rt):
                if t is not None and t != A.BOOL:
                    self.err("type", f"operator {op!r} applied to {t}, expected Bool", e.pos)
            return replace(e, lhs=lhs, rhs=rhs), A.BOOL
        if op in _EQ:
            # null takes its type from the other operand.
            if isinstance(e.lhs, A.Null) and not isinstance(e.rhs, A.Null):
                rhs, rt = self.expr(e.rhs, None)
                lhs, lt = self.expr(e.lhs, rt)
            else:
                lhs, lt = self.expr(e.lhs, None)
                rhs, rt = self.expr(e.rhs, lt)
            if lt is not None and rt is not None and lt != rt and not (_numeric(lt) and _numeric(rt)):
                self.err("type", f"cannot compare {lt} with {rt}", e.pos)
            return replace(e, lhs=lhs, rhs=rhs), A.BOOL
        lhs, lt = self.expr(e.lhs, A.INT)
        rhs, rt = self.expr(e.rhs, A.INT)
        for t in (lt, rt):
            if t is not None and not _numeric(t):
                self.err("type", f"operator {op!r} applied to {t}, expected Nat or Int", e.pos)
        if op in _REL:
            return replace(e, lhs=lhs, rhs=rhs), A.BOOL
        if op in _ARITH:
            t = A.NAT if (lt == A.NAT and rt == A.NAT and op != "-") else A.INT
            return replace(e, lhs=lhs, rhs=rhs), t
        raise TypeError(f"unknown operator {op!r}")

    def constructor(self, e: A.Constructor) -> tuple[A.Expr, Optional[A.SynType]]:
        sdef = self.structs.get(e.struct)
        if sdef is None:
            self.err("type", f"unknown struct {e.struct!r}", e.pos)
            return e, None
        if len(e.args) != len(sdef.params):
            self.err(
                "type",
                f"{e.struct} takes {len(sdef.params)} argument(s), {len(e.args)} given",
                e.pos,
            )
            return e, A.Named(e.struct)
        args = []
        for arg, (pname, ptype) in zip(e.args, sdef.params):
            a, at = self.expr(arg, ptype)
            if not assignable(ptype, at):
                self.err("type", f"argument {pname!r} of {e.struct} expects {ptype}, got {at}", e.pos)
            args.append(a)
        return replace(e, args=tuple(args)), A.Named(e.struct)

    def chain(self, e: A.VarChain, lvalue: bool) -> tuple[A.Expr, Optional[A.SynType]]:
        head = e.head
        t = self.lookup_local(head)
        if t is None:
            t = self.params.get(head)
        if t is None:
            if head in self.step_locals:
                self.err("rule-6", f"local variable {head!r} is used before its declaration", e.pos)
            else:
                self.err("type", f"undeclared variable {head!r}", e.pos)
            return e, None
        segments: list[A.Segment] = [e.segments[0]]
        rest = e.segments[1:]
        for i, seg in enumerate(rest):
            last = i == len(rest) - 1
            if isinstance(seg, A.Index):
                idx, it = self.expr(seg.index, A.NAT)
                if it is not None and it != A.NAT:
                    self.err("type", f"array index has type {it}, expected Nat", e.pos)
                if not isinstance(t, A.ArrayOf):
                    self.err("type", f"cannot index a value of type {t}", e.pos)
                    return e, None
                segments.append(A.Index(idx))
                t = t.elem
                continue
            if isinstance(t, A.ArrayOf):
                if seg.name == "s" and last:
                    if lvalue:
                        self.err("type", "cannot assign to an array size", e.pos)
                    return A.ArraySize(A.VarChain(tuple(segments), e.pos), e.pos), A.NAT
                self.err("type", f"arrays have no field {seg.name!r}", e.pos)
                return e, None
            if t is None or not isinstance(t, A.Named) or not t.is_struct:
                self.err("type", f"cannot access field {seg.name!r} of a value of type {t}", e.pos)
                return e, None
            sdef = self.structs.get(t.name)
            ptype = dict(sdef.params).get(seg.name) if sdef else None
            if ptype is None:
                self.err("type", f"struct {t.name} has no parameter {seg.name!r}", e.pos)
                return e, None
            segments.append(seg)
            t = ptype
        return A.VarChain(tuple(segments), e.pos), t

    # -- schedule ------------------------------------------------------------

    def schedule(self, items: tuple[A.SchedItem, ...]) -> None:
        all_params = {p for s in self.prog.structs for p in s.param_names}
        for item in A.walk_schedule(items):
            if isinstance(item, A.Call):
                if item.struct is None:
                    if not any(s.step(item.step) is not None for s in self.prog.structs):
                        self.err("type", f"step {item.step!r} is not declared by any struct", item.pos)
                else:
                    sdef = self.structs.get(item.struct)
                    if sdef is None:
                        self.err("type", f"unknown struct {item.struct!r} in schedule", item.pos)
                    elif sdef.step(item.step) is None:
                        self.err("type", f"struct {item.struct!r} declares no step {item.step!r}", item.pos)
            elif isinstance(item, A.Fix) and item.params is not None:
                if "param-fix" not in self.ext:
                    self.err("extension", "parameter-specific fixpoints require --ext param-fix", item.pos)
                for p in item.params:
                    if p not in all_params:
                        self.err("type", f"fixpoint parameter {p!r} is not a declared parameter", item.pos)
            elif isinstance(item, A.Iter):
                if "iter" not in self.ext:
                    self.err("extension", "iterators require --ext iter", item.pos)
                for step in item.steps:
                    if not any(s.step(step) is not None for s in self.prog.structs):
                        self.err("type", f"step {step!r} is not declared by any struct", item.pos)


def _declared_names(stmts: Iterable[A.Stmt]):
    for s in stmts:
        if isinstance(s, A.VarDecl):
            yield s.name
        elif isinstance(s, A.IfThen):
            yield from _declared_names(s.body)
            if s.orelse:
                yield from _declared_names(s.orelse)


def check_well_formed(program: A.Program, extensions: Iterable[str] = ()) -> ValidatedProgram:
    """Validate ``program``; raise :class:`WellFormednessError` listing every violation."""
    ext = frozenset(extensions)
    checker = _Checker(program, ext)
    annotated = checker.check()
    if checker.errors:
        raise WellFormednessError(checker.errors)
    return ValidatedProgram(desugar(annotated), ext)


def load_program(source: str, extensions: Iterable[str] = ()) -> ValidatedProgram:
    """Parse and validate source text in one go."""
    ext = frozenset(extensions)
    return check_well_formed(parse_program(source, ext), ext)
