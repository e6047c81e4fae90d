"""Recursive-descent parser for AuDaLa source text.

Grammar (C-style tokens, ``//`` and ``/* */`` comments)::

    program   := struct* schedule
    struct    := "struct" Id "(" [param ("," param)*] ")" "{" step* "}"
    param     := Id ":" type
    type      := "Nat" | "Int" | "Bool" | "String" | Id | "Array" "(" type ")"
    step      := Id "{" stmt* "}"
    stmt      := "if" expr ["then"] block ["else" (stmt_if | block)]
               | type Id ":=" expr ";"
               | Id "(" args ")" ";"
               | var ":=" expr ";"
    var       := ["this" "."] Id ("." Id | "[" expr "]")*
    schedule  := [item ("<" item)*]
    item      := Id ["." Id] | "Fix" "(" schedule ("," Id)* ")"
               | "Iter" "(" Id (";" Id)* ")"

Both ``=`` and ``==`` denote equality and are normalised to ``=``.
"""

from __future__ import annotations

import json
from typing import Iterable, Optional

from . import ast as A
from .errors import ParseError
from .lexer import KEYWORDS, Token, tokenize

EXTENSIONS = frozenset({"param-fix", "iter", "arrays"})

_TYPE_KEYWORDS = {"Nat", "Int", "Bool", "String", "Array"}

_INT_MAX = 2**63 - 1


class _Parser:
    def __init__(self, source: str, extensions: frozenset[str]):
        self.toks = tokenize(source)
        self.i = 0
        self.ext = extensions

    # -- token helpers -----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("sym", "keyword") and t.text == text

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def error(self, message: str, tok: Optional[Token] = None, rule: str = "syntax") -> ParseError:
        t = tok or self.tok
        return ParseError(message, t.line, t.col, rule)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def ident(self, what: str = "identifier") -> str:
        t = self.tok
        if t.kind == "ident":
            self.advance()
            return t.text
        if t.kind == "keyword":
            raise self.error(f"keyword {t.text!r} cannot be used as {what}", rule="rule-1")
        raise self.error(f"expected {what}, found {t.text or 'end of input'!r}")

    def pos(self, tok: Optional[Token] = None) -> A.Pos:
        t = tok or self.tok
        return A.Pos(t.line, t.col)

    def need(self, ext: str, construct: str, tok: Token) -> None:
        if ext not in self.ext:
            raise self.error(f"{construct} requires --ext {ext}", tok, rule="extension")

    # -- program -----------------------------------------------------------

    def program(self) -> A.Program:
        structs = []
        while self.at("struct"):
            structs.append(self.struct())
        schedule = self.schedule() if self.tok.kind != "eof" else ()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r} after schedule")
        return A.Program(tuple(structs), schedule)

    def struct(self) -> A.StructDef:
        start = self.expect("struct")
        name = self.ident("struct name")
        self.expect("(")
        params = []
        if not self.at(")"):
            params.append(self.param())
            while self.at(","):
                self.advance()
                params.append(self.param())
        self.expect(")")
        self.expect("{")
        steps = []
        while not self.at("}"):
            step_name = self.ident("step name")
            if not self.at("{"):
                raise self.error(f"expected '{{' after step name {step_name!r}")
            steps.append((step_name, self.block()))
        self.expect("}")
        return A.StructDef(name, tuple(params), tuple(steps), self.pos(start))

    def param(self) -> tuple[str, A.SynType]:
        name = self.ident("parameter name")
        self.expect(":")
        return name, self.type()

    def type(self) -> A.SynType:
        t = self.tok
        if t.kind == "keyword" and t.text == "Array":
            self.need("arrays", "Array type", t)
            self.advance()
            self.expect("(")
            elem = self.type()
            self.expect(")")
            return A.ArrayOf(elem)
        if t.kind == "keyword" and t.text in _TYPE_KEYWORDS:
            self.advance()
            return A.Named(t.text)
        return A.Named(self.ident("type name"))

    # -- statements --------------------------------------------------------

    def block(self) -> tuple[A.Stmt, ...]:
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error("unterminated block")
            stmts.append(self.stmt())
        self.expect("}")
        return tuple(stmts)

    def stmt(self) -> A.Stmt:
        t = self.tok
        if self.at("if"):
            return self.if_stmt()
        if t.kind == "keyword" and t.text in _TYPE_KEYWORDS:
            return self.var_decl()
        if t.kind == "ident":
            nxt = self.peek()
            if nxt.kind in ("ident", "keyword") and self.peek(2).text == ":=":
                return self.var_decl()
            if nxt.kind == "sym" and nxt.text == "(":
                call = self.constructor()
                self.expect(";")
                return A.ConstructorStmt(call, self.pos(t))
        if t.kind in ("ident", "keyword") and (t.kind == "ident" or t.text == "this"):
            target = self.var_chain()
            if not isinstance(target, A.VarChain):
                raise self.error("cannot assign to 'this'", t)
            self.expect(":=")
            expr = self.expr()
            self.expect(";")
            return A.Update(target, expr, self.pos(t))
        if t.kind == "keyword":
            raise self.error(f"keyword {t.text!r} cannot start a statement", rule="rule-1")
        raise self.error(f"expected a statement, found {t.text or 'end of input'!r}")

    def if_stmt(self) -> A.IfThen:
        start = self.expect("if")
        cond = self.expr()
        if self.at("then"):
            self.advance()
        body = self.block()
        orelse = None
        if self.at("else"):
            self.advance()
            if self.at("if"):
                orelse = (self.if_stmt(),)
            else:
                orelse = self.block()
        return A.IfThen(cond, body, orelse, self.pos(start))

    def var_decl(self) -> A.VarDecl:
        start = self.tok
        typ = self.type()
        name = self.ident("variable name")
        self.expect(":=")
        expr = self.expr()
        self.expect(";")
        return A.VarDecl(typ, name, expr, self.pos(start))

    def constructor(self) -> A.Constructor:
        start = self.tok
        name = self.ident("struct name")
        self.expect("(")
        args = []
        if not self.at(")"):
            args.append(self.expr())
            while self.at(","):
                self.advance()
                args.append(self.expr())
        self.expect(")")
        return A.Constructor(name, tuple(args), self.pos(start))

    def var_chain(self) -> A.Expr:
        """Parse ``[this .] x (.y | [e])*``; a bare ``this`` yields :class:`This`."""
        start = self.tok
        segments: list[A.Segment] = []
        if self.at("this"):
            self.advance()
            if not self.at("."):
                return A.This(self.pos(start))
            self.advance()
        segments.append(A.Field(self.ident()))
        while True:
            if self.at("."):
                self.advance()
                segments.append(A.Field(self.ident("field name")))
            elif self.at("["):
                self.need("arrays", "array indexing", self.tok)
                self.advance()
                segments.append(A.Index(self.expr()))
                self.expect("]")
            else:
                break
        return A.VarChain(tuple(segments), self.pos(start))

    # -- expressions -------------------------------------------------------

    def expr(self) -> A.Expr:
        return self.binary(0)

    _LEVELS: tuple[tuple[str, ...], ...] = (
        ("||",),
        ("&&",),
        ("=", "==", "!="),
        ("<", "<=", ">", ">="),
        ("+", "-"),
        ("*", "/", "%"),
    )

    def binary(self, level: int) -> A.Expr:
        if level == len(self._LEVELS):
            return self.unary()
        lhs = self.binary(level + 1)
        ops = self._LEVELS[level]
        while self.tok.kind == "sym" and self.tok.text in ops:
            op_tok = self.advance()
            op = "=" if op_tok.text == "==" else op_tok.text
            rhs = self.binary(level + 1)
            lhs = A.BinOp(op, lhs, rhs, self.pos(op_tok))
        return lhs

    def unary(self) -> A.Expr:
        t = self.tok
        if self.at("!"):
            self.advance()
            return A.Not(self.unary(), self.pos(t))
        if self.at("-"):
            self.advance()
            if self.tok.kind != "int":
                raise self.error("unary minus is only supported on integer literals", t)
            return A.Literal(-self.int_value(self.advance(), negative=True), None, self.pos(t))
        return self.primary()

    def int_value(self, tok: Token, negative: bool = False) -> int:
        value = int(tok.text)
        if value > _INT_MAX + (1 if negative else 0):
            raise self.error(f"integer literal {tok.text} does not fit in 64 bits", tok)
        return value

    def primary(self) -> A.Expr:
        t = self.tok
        if t.kind == "int":
            self.advance()
            return A.Literal(self.int_value(t), None, self.pos(t))
        if t.kind == "string":
            self.advance()
            return A.Literal(_unquote(t.text), A.STRING, self.pos(t))
        if self.at("true") or self.at("false"):
            self.advance()
            return A.Literal(t.text == "true", A.BOOL, self.pos(t))
        if self.at("null"):
            self.advance()
            return A.Null(None, self.pos(t))
        if self.at("("):
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        if self.at("array"):
            self.need("arrays", "array(...)", t)
            self.advance()
            self.expect("(")
            size = self.expr()
            self.expect(")")
            return A.ArrayNew(size, None, self.pos(t))
        if self.at("this"):
            return self.var_chain()
        if t.kind == "ident":
            if self.peek().kind == "sym" and self.peek().text == "(":
                return self.constructor()
            return self.var_chain()
        if t.kind == "keyword":
            raise self.error(f"keyword {t.text!r} cannot be used as an identifier", rule="rule-1")
        raise self.error(f"expected an expression, found {t.text or 'end of input'!r}")

    # -- schedule ----------------------------------------------------------

    def schedule(self) -> tuple[A.SchedItem, ...]:
        items = [self.sched_item()]
        while self.at("<"):
            self.advance()
            items.append(self.sched_item())
        return tuple(items)

    def sched_item(self) -> A.SchedItem:
        t = self.tok
        if self.at("Fix"):
            self.advance()
            self.expect("(")
            body = self.schedule()
            params = None
            if self.at(","):
                self.need("param-fix", "Fix(schedule, parameters)", self.tok)
                names = []
                while self.at(","):
                    self.advance()
                    names.append(self.ident("parameter name"))
                params = tuple(names)
            self.expect(")")
            return A.Fix(body, params, self.pos(t))
        if self.at("Iter"):
            self.need("iter", "Iter(...)", t)
            self.advance()
            self.expect("(")
            if self.at("Fix") or self.at("Iter"):
                raise self.error("an iterator cannot contain nested fixpoints or iterators")
            steps = [self.ident("step name")]
            while self.at(";"):
                self.advance()
                if self.at("Fix") or self.at("Iter"):
                    raise self.error("an iterator cannot contain nested fixpoints or iterators")
                steps.append(self.ident("step name"))
            if self.at("."):
                raise self.error("an iterator lists step names only")
            self.expect(")")
            return A.Iter(tuple(steps), self.pos(t))
        first = self.ident("step name")
        if self.at("."):
            self.advance()
            step = self.ident("step name")
            return A.Call(step, first, self.pos(t))
        return A.Call(first, None, self.pos(t))


def _unquote(text: str) -> str:
    try:
        return json.loads(text)
    except ValueError:
        return text[1:-1]


def parse_program(source: str, extensions: Iterable[str] = ()) -> A.Program:
    """Parse source text into a :class:`~audala.syntax.ast.Program`.

    Raises :class:`ParseError` carrying a line/column. Constructs belonging to
    an extension that is not listed in ``extensions`` are rejected with a
    message naming the missing ``--ext`` flag.
    """
    ext = frozenset(extensions)
    unknown = ext - EXTENSIONS
    if unknown:
        raise ValueError(f"unknown extension(s): {', '.join(sorted(unknown))}")
    return _Parser(source, ext).program()


__all__ = ["parse_program", "EXTENSIONS", "KEYWORDS"]
