from __future__ import annotations

from hypothesis import given, settings, strategies as st

from audala import ir
from audala.ir import (
    NULL_ARRAY, Arr, Asize, Cons, If, Label, NotCmd, Op, Push, PushThis, Rd, RdA, Wr, WrA,
    default_val, interp_expr, interp_statements, render,
)
from audala.syntax import ast as A
from audala.syntax.checker import load_program

from conftest import load

GOLDEN = """\
Push(this)
Rd(in)
Rd(reach)
Push(true)
Op(=)
If
  Push(true)
  Push(this)
  Rd(out)
  Wr(reach)"""


def test_reachability_lowering():
    vp = load("listing1.adl")
    cmds = interp_statements(vp.structs["Edge"].step("reachability"))
    assert cmds == [
        PushThis(), Rd("in"), Rd("reach"), Push(True), Op("="),
        If((Push(True), PushThis(), Rd("out"), Wr("reach"))),
    ]
    assert render(cmds) == GOLDEN


def test_empty_statement_list():
    assert interp_statements(()) == []


def test_local_update():
    vp = load_program("struct S (y: Int) { f { Int x := 0; x := 1 + 2; } }\nf")
    cmds = interp_statements(vp.structs["S"].step("f")[1:])
    assert cmds == [Push(1), Push(2), Op("+"), PushThis(), Wr("x")]


def test_declaration_lowers_like_update_on_this():
    vp = load_program("struct S (y: Int) { f { Int x := 4; } }\nf")
    assert interp_statements(vp.structs["S"].step("f")) == [Push(4), PushThis(), Wr("x")]


def test_expression_examples():
    assert interp_expr(A.Literal(5, A.NAT)) == [Push(5)]
    assert interp_expr(A.Not(A.Literal(True, A.BOOL))) == [Push(True), NotCmd()]
    vp = load("listing1.adl")
    init = vp.structs["Edge"].step("init")
    edge12 = init[4].expr
    assert interp_expr(edge12) == [PushThis(), Rd("node1"), PushThis(), Rd("node2"), Cons("Edge", 2)]


def test_this_and_null():
    assert interp_expr(A.This()) == [PushThis()]
    assert interp_expr(A.Null(A.Named("Node"))) == [Push(Label(0, "Node"))]
    assert interp_expr(A.Null(A.INT)) == [Push(0)]


def test_default_values():
    assert default_val(A.INT) == 0 and not isinstance(default_val(A.INT), bool)
    assert default_val(A.NAT) == 0
    assert default_val(A.BOOL) is False
    assert default_val(A.STRING) == ""
    assert default_val(A.Named("Node")) == Label(0, "Node")
    assert default_val(A.ArrayOf(A.INT)) == NULL_ARRAY


def test_push_keeps_bool_and_int_apart():
    assert Push(True) != Push(1)
    assert Push(0) != Push(False)
    assert Push(3) == Push(3)
    assert len({Push(True), Push(1)}) == 2


def test_array_clauses():
    vp = load("listing10.adl")
    body = vp.structs["Node"].step("reachability")
    cmds = interp_statements(body)
    inner = cmds[-1].body[-1].body  # if (reach) { if (done < succ.s) { ... } }
    # X[E].p := v  lowers to  v; X; E; RdA; Wr(p)
    assert inner[:7] == (Push(True), PushThis(), Rd("succ"), PushThis(), Rd("done"), RdA(), Wr("reach"))
    guard = cmds[-1].body[:6]
    assert guard == (PushThis(), Rd("done"), PushThis(), Rd("succ"), Asize(), Op("<"))
    init = interp_statements(vp.structs["Node"].step("init"))
    assert init[:4] == [Push(True), Push(2), Arr(A.Named("Node")), Push(0)]
    # node1.succ[0] := node2  lowers to  node2; node1.succ; 0; WrA
    tail = init[-7:]
    assert tail == [PushThis(), Rd("node4"), PushThis(), Rd("node3"), Rd("succ"), Push(0), WrA()]


def test_render_nesting():
    text = render([If((If((Push(1),)),))])
    assert text == "If\n  If\n    Push(1)"


def test_commands_are_hashable_and_rendered():
    assert str(Cons("Edge", 2)) == "Cons(Edge)"
    assert str(Push("a")) == 'Push("a")'
    assert str(Push(Label(0, "Node"))) == "Push(null<Node>)"
    assert hash(If((Push(1),))) == hash(If((Push(1),)))


# -- property: lowering is a homomorphism and respects if-depth --------------

simple = st.sampled_from([
    "x := x + 1;",
    "b := !b;",
    "if (b) { x := 2; }",
    "if (x < 3) { if (b) { b := false; } }",
    "Int t{n} := x * 2;",
    "S(x, b);",
])


@settings(max_examples=100, deadline=None)
@given(st.lists(simple, max_size=6), st.lists(simple, max_size=6))
def test_homomorphism(first, second):
    def numbered(stmts, offset):
        return [s.replace("{n}", str(i + offset)) for i, s in enumerate(stmts)]

    a, b = numbered(first, 0), numbered(second, 100)
    src = "struct S (x: Int, b: Bool) {{ f {{ {} }} }}\nf"
    whole = load_program(src.format(" ".join(a + b))).structs["S"].step("f")
    left = load_program(src.format(" ".join(a))).structs["S"].step("f")
    right = load_program(src.format(" ".join(b))).structs["S"].step("f")
    assert interp_statements(whole) == interp_statements(left) + interp_statements(right)
    assert interp_statements(whole) == interp_statements(whole)
    depth = max((s.count("if") for s in a + b), default=0)
    assert ir.if_depth(interp_statements(whole)) <= depth
