"""Source printer. Output re-parses to an equal AST."""

from __future__ import annotations

import json

from . import ast as A


def expr(e: A.Expr) -> str:
    if isinstance(e, A.Literal):
        if isinstance(e.value, bool):
            return "true" if e.value else "false"
        if isinstance(e.value, str):
            return json.dumps(e.value)
        return str(e.value)
    if isinstance(e, A.This):
        return "this"
    if isinstance(e, A.Null):
        return "null"
    if isinstance(e, A.VarChain):
        return chain(e)
    if isinstance(e, A.ArraySize):
        return chain(e.chain) + ".s"
    if isinstance(e, A.Not):
        return "!" + _operand(e.expr)
    if isinstance(e, A.BinOp):
        op = "==" if e.op == "=" else e.op
        return f"({expr(e.lhs)} {op} {expr(e.rhs)})"
    if isinstance(e, A.Constructor):
        return f"{e.struct}({', '.join(expr(a) for a in e.args)})"
    if isinstance(e, A.ArrayNew):
        return f"array({expr(e.size)})"
    raise TypeError(f"cannot print {e!r}")


def _operand(e: A.Expr) -> str:
    text = expr(e)
    if isinstance(e, A.Literal) and isinstance(e.value, int) and not isinstance(e.value, bool) and e.value < 0:
        return f"({text})"
    return text


def chain(c: A.VarChain) -> str:
    out = ""
    for i, seg in enumerate(c.segments):
        if isinstance(seg, A.Field):
            out += ("." if i else "") + seg.name
        else:
            out += f"[{expr(seg.index)}]"
    return out


def syn_type(t: A.SynType) -> str:
    return str(t)


def statements(stmts, indent: int) -> list[str]:
    pad = "\t" * indent
    lines: list[str] = []
    for s in stmts:
        if isinstance(s, A.IfThen):
            lines.append(f"{pad}if ({expr(s.cond)}) then {{")
            lines += statements(s.body, indent + 1)
            orelse = s.orelse
            while orelse is not None:
                if len(orelse) == 1 and isinstance(orelse[0], A.IfThen):
                    nested = orelse[0]
                    lines.append(f"{pad}}} else if ({expr(nested.cond)}) then {{")
                    lines += statements(nested.body, indent + 1)
                    orelse = nested.orelse
                else:
                    lines.append(f"{pad}}} else {{")
                    lines += statements(orelse, indent + 1)
                    orelse = None
            lines.append(f"{pad}}}")
        elif isinstance(s, A.VarDecl):
            lines.append(f"{pad}{syn_type(s.type)} {s.name} := {expr(s.expr)};")
        elif isinstance(s, A.Update):
            lines.append(f"{pad}{chain(s.target)} := {expr(s.expr)};")
        elif isinstance(s, A.ConstructorStmt):
            lines.append(f"{pad}{expr(s.call)};")
        else:
            raise TypeError(f"cannot print {s!r}")
    return lines


def schedule(items) -> str:
    parts = []
    for it in items:
        if isinstance(it, A.Call):
            parts.append(str(it))
        elif isinstance(it, A.Fix):
            extra = "" if it.params is None else ", " + ", ".join(it.params)
            parts.append(f"Fix({schedule(it.body)}{extra})")
        elif isinstance(it, A.Iter):
            parts.append(f"Iter({'; '.join(it.steps)})")
        else:
            raise TypeError(f"cannot print {it!r}")
    return " < ".join(parts)


def program(p: A.Program) -> str:
    """Render a whole program as source text."""
    out: list[str] = []
    for s in p.structs:
        params = ", ".join(f"{name}: {syn_type(t)}" for name, t in s.params)
        if not s.steps:
            out.append(f"struct {s.name} ({params}) {{}}")
            continue
        out.append(f"struct {s.name} ({params}) {{")
        for name, body in s.steps:
            out.append(f"\t{name} {{")
            out += statements(body, 2)
            out.append("\t}")
        out.append("}")
    out.append(schedule(p.schedule))
    return "\n".join(out) + "\n"
