from __future__ import annotations

from collections import deque

import pytest
from hypothesis import given, settings, strategies as st

from audala.engine.policies import LockstepRoundRobin, SeededRandom, SequentialByLabel, make_policy
from audala.engine.runner import Limits, Runner, run
from audala.engine.semantics import (
    IllegalTransition, RuntimeFault, Transition, apply_op, apply_transition, enabled_transitions,
)
from audala.engine.state import AFix, done, initial_state
from audala.ir import Cons, If, Label, Op, Push, Wr
from audala.syntax import ast as A
from audala.syntax.checker import load_program

from conftest import EXTS, load

NODE0 = Label(0, "Node")
EDGE0 = Label(0, "Edge")
POLICIES = [LockstepRoundRobin(), SequentialByLabel(), SeededRandom(7)]


def bfs_reach(edges, sources):
    seen = set(sources)
    todo = deque(sources)
    while todo:
        n = todo.popleft()
        for a, b in edges:
            if a == n and b not in seen:
                seen.add(b)
                todo.append(b)
    return seen


def node_reach(state):
    return [i.env["reach"] for lab, i in sorted(state.structs.items()) if i.struct == "Node" and not lab.is_null]


# -- initial state and Done ----------------------------------------------------


def test_initial_state_listing1():
    st0 = initial_state(load("listing1.adl"))
    assert set(st0.structs) == {NODE0, EDGE0}
    assert st0.structs[NODE0].env == {"reach": False}
    assert st0.structs[EDGE0].env == {"in": NODE0, "out": NODE0}
    assert st0.stab == [] and st0.mem == {}


def test_initial_state_without_structs():
    st0 = initial_state(load_program(""))
    assert st0.structs == {} and st0.schedule == ()
    assert run(load_program("")).transitions == 0


def test_initial_state_listing6():
    st0 = initial_state(load("listing6.adl"))
    ctrl = st0.structs[Label(0, "Control")].env
    assert ctrl == {"head": Label(0, "TapeCell"), "state": 0, "accepting": False}
    assert len(st0.structs) == 2


def test_done_predicate():
    st0 = initial_state(load("listing1.adl"))
    assert done(st0)
    after = apply_transition(st0, Transition("InitG"))
    assert not done(after)
    assert done(st0)  # the input state is untouched
    s = st0.copy()
    s.structs[EDGE0].cmds = [Push(1)]
    s.busy.add(EDGE0)
    assert not done(s)


# -- enabled transitions -------------------------------------------------------


def test_initial_enabled_is_initg():
    assert enabled_transitions(initial_state(load("listing1.adl"))) == [Transition("InitG")]


def test_two_busy_instances_no_schedule_rule():
    s = initial_state(load("listing1.adl"))
    for lab in (NODE0, EDGE0):
        s.structs[lab].cmds = [Push(1)]
        s.busy.add(lab)
    ts = enabled_transitions(s)
    assert [t.label for t in ts] == sorted([NODE0, EDGE0])
    assert all(t.rule == "ComPush" for t in ts)


def test_fixterm_when_stable():
    s = initial_state(load("listing1.adl"))
    s.schedule = (AFix((A.Call("reachability"),)),)
    s.stab = [True]
    s.sf = [None]
    s.iters = [1]
    assert enabled_transitions(s) == [Transition("FixTerm")]
    s.stab = [False]
    assert enabled_transitions(s) == [Transition("FixIter")]


def test_blocked_command_is_not_enabled():
    s = initial_state(load("listing1.adl"))
    s.structs[EDGE0].cmds = [Wr("reach")]
    s.structs[EDGE0].stack = [1, 2]
    s.busy.add(EDGE0)
    assert enabled_transitions(s) == []
    with pytest.raises(IllegalTransition):
        apply_transition(s, Transition("ComWr", EDGE0))


# -- individual command rules -----------------------------------------------------


def _with(state, label, cmds, stack):
    s = state.copy()
    s.structs[label].cmds = list(reversed(cmds))
    s.structs[label].stack = list(stack)
    s.busy.add(label)
    return s


def test_com_op_adds():
    s = _with(initial_state(load("listing1.adl")), EDGE0, [Op("+")], [2, 3])
    out = apply_transition(s, Transition("ComOp", EDGE0))
    assert out.structs[EDGE0].stack == [5]
    assert done(out)


def _reach_world():
    """After init of listing1, inside one fixpoint level."""
    vp = load("listing1.adl")
    res = Runner(vp, LockstepRoundRobin(), observer=lambda s, r: r == "FixInit").run()
    s = res.state
    s.stab, s.sf, s.iters = [True], [None], [1]
    node2 = s.structs[EDGE0].env["node2"]
    return s, node2


def test_com_wr_change_resets_stability():
    s, node2 = _reach_world()
    s = _with(s, EDGE0, [Wr("reach")], [True, node2])
    out = apply_transition(s, Transition("ComWr", EDGE0))
    assert out.structs[node2].env["reach"] is True
    assert out.stab == [False]


def test_com_wr_same_value_keeps_stability():
    s, node2 = _reach_world()
    s.structs[node2].env["reach"] = True
    s = _with(s, EDGE0, [Wr("reach")], [True, node2])
    out = apply_transition(s, Transition("ComWr", EDGE0))
    assert out.stab == [True]


def test_com_wr_local_never_resets():
    s, _ = _reach_world()
    s = _with(s, EDGE0, [Wr("scratch")], [5, EDGE0])
    out = apply_transition(s, Transition("ComWr", EDGE0))
    assert out.structs[EDGE0].env["scratch"] == 5
    assert out.stab == [True]


def test_com_wr_null_skip():
    s, _ = _reach_world()
    s = _with(s, EDGE0, [Wr("reach")], [True, NODE0])
    out = apply_transition(s, Transition("ComWrNSkip", EDGE0))
    assert out.structs[NODE0].env == {"reach": False}
    assert out.structs[EDGE0].stack == []
    assert out.stab == [True]


@settings(max_examples=50, deadline=None)
@given(st.booleans(), st.integers(min_value=0, max_value=3))
def test_write_to_null_changes_nothing_else(value, depth):
    s = initial_state(load("listing1.adl"))
    s.stab = [True, False, True][:depth] if depth < 3 else [True, True, True]
    s.sf = [None] * len(s.stab)
    s.iters = [1] * len(s.stab)
    s = _with(s, EDGE0, [Wr("reach")], [value, NODE0])
    out = apply_transition(s, Transition("ComWrNSkip", EDGE0))
    expected = s.copy()
    expected.structs[EDGE0].cmds = []
    expected.structs[EDGE0].stack = []
    expected.busy.discard(EDGE0)
    assert out.snapshot() == expected.snapshot()


def test_com_cons_resets_all_levels():
    s, node2 = _reach_world()
    s.stab = [True, True]
    s.sf = [None, None]
    s = _with(s, EDGE0, [Cons("Edge", 2)], [NODE0, node2])
    before = set(s.structs)
    out = apply_transition(s, Transition("ComCons", EDGE0))
    (new,) = set(out.structs) - before
    assert out.structs[new].env == {"in": NODE0, "out": node2}
    assert out.structs[new].cmds == [] and out.structs[new].stack == []
    assert out.structs[EDGE0].stack == [new]
    assert out.stab == [False, False]


def test_if_true_and_false():
    s = initial_state(load("listing1.adl"))
    t = apply_transition(_with(s, EDGE0, [If((Push(1), Push(2)))], [True]), Transition("ComIfT", EDGE0))
    assert t.structs[EDGE0].commands == [Push(1), Push(2)]
    f = apply_transition(_with(s, EDGE0, [If((Push(1),))], [False]), Transition("ComIfF", EDGE0))
    assert f.structs[EDGE0].commands == []


def test_init_clears_stacks_of_all_instances():
    s, node2 = _reach_world()
    s.stab, s.sf, s.iters = [], [], []
    s.schedule = (A.Call("reachability"),)
    for inst in s.structs.values():
        inst.stack = [1, 2, 3]
    out = apply_transition(s, Transition("InitG"))
    assert all(i.stack == [] for i in out.structs.values())
    assert out.structs[node2].cmds == []  # Node lacks the step: empty list
    edges = [lab for lab, i in out.structs.items() if i.struct == "Edge"]
    assert all(len(out.structs[e].cmds) == 6 for e in edges)


def test_initl_targets_named_struct_only():
    s, node2 = _reach_world()
    s.stab, s.sf, s.iters = [], [], []
    s.schedule = (A.Call("reachability", "Node"),)
    for inst in s.structs.values():
        inst.stack = [9]
    out = apply_transition(s, Transition("InitL"))
    assert out.structs[EDGE0].stack == [9]
    assert out.structs[node2].stack == []
    assert done(out)


# -- operators -----------------------------------------------------------------


def test_integer_semantics():
    assert apply_op("/", 7, 2) == 3
    assert apply_op("/", -7, 2) == -3
    assert apply_op("%", -7, 2) == -1
    assert apply_op("+", 2**63 - 1, 1) == -(2**63)
    assert apply_op("*", 2**62, 4) == 0
    with pytest.raises(RuntimeFault) as e:
        apply_op("/", 1, 0)
    assert e.value.kind == "DivisionByZero"


def test_division_by_zero_is_runtime_fault():
    vp = load_program("struct S (x: Int) { f { x := 1 / x; } init { S(0); } }\ninit < f")
    res = run(vp)
    assert res.status == "RuntimeFault" and res.exit_code == 4
    assert "DivisionByZero" in res.message


# -- whole runs ----------------------------------------------------------------------


@pytest.mark.parametrize("policy", POLICIES, ids=lambda p: p.name)
def test_listing1_reaches_everything(policy):
    res = run(load("listing1.adl"), policy)
    assert res.status == "Completed"
    oracle = bfs_reach([(1, 2), (1, 3), (2, 3), (3, 4)], [1])
    assert node_reach(res.state) == [n in oracle for n in (1, 2, 3, 4)] == [True] * 4


def test_listing8_diverges():
    res = run(load("listing8.adl"), LockstepRoundRobin(), Limits(max_fix_iterations=1000))
    assert res.status == "DivergenceSuspected" and res.exit_code == 2
    assert "aFix" in res.message and "1000" in res.message


def test_empty_schedule():
    res = run(load_program("struct S (x: Int) { f {} }\n"))
    assert res.status == "Completed" and res.transitions == 0


def test_transition_limit():
    res = run(load("listing1.adl"), LockstepRoundRobin(), Limits(max_transitions=10))
    assert res.status == "DivergenceSuspected" and res.transitions == 10


@pytest.mark.parametrize("name", sorted(EXTS))
@pytest.mark.parametrize("policy", POLICIES + [SeededRandom(1), SeededRandom(99)], ids=str)
def test_corpus_never_stuck(name, policy):
    res = run(load(name), policy, Limits(max_fix_iterations=200))
    assert res.status in ("Completed", "DivergenceSuspected")


def test_stuck_is_reported():
    s = initial_state(load("listing1.adl"))
    s = _with(s, EDGE0, [If((Push(1),))], [3])
    res = Runner(s.machine, state=s).run()
    assert res.status == "Stuck" and res.exit_code == 3


def test_trace_is_deterministic():
    a = run(load("listing11.adl"), SeededRandom(5), trace=True)
    b = run(load("listing11.adl"), SeededRandom(5), trace=True)
    assert [e.to_json() for e in a.trace] == [e.to_json() for e in b.trace]
    assert a.state.snapshot() == b.state.snapshot()


def test_trace_records_changes_and_stability():
    res = run(load("listing1.adl"), trace=True)
    writes = [e for e in res.trace if e.changed]
    assert writes and all(e.rule == "ComWr" and e.stab == [False] for e in writes)
    assert res.trace[0].rule == "InitG" and res.trace[0].idle


@pytest.mark.parametrize("name", ["listing1.adl", "listing6.adl", "listing10.adl"])
@pytest.mark.parametrize("policy", POLICIES, ids=lambda p: p.name)
def test_fixterm_only_after_quiet_iteration(name, policy):
    res = run(load(name), policy, trace=True)
    assert res.status == "Completed"
    ev = res.trace
    for i, e in enumerate(ev):
        if e.rule != "FixTerm":
            continue
        start = max(j for j in range(i) if ev[j].rule in ("FixInit", "FixIter"))
        segment = ev[start + 1:i]
        assert not any(x.changed for x in segment)
        assert not any(x.rule == "ComCons" for x in segment)


@pytest.mark.parametrize("name", sorted(EXTS))
def test_idle_schedule_rules_leave_instances_alone(name):
    seen = []

    def observe(state, rule):
        seen.append((rule, state.copy()))

    res = Runner(load(name), LockstepRoundRobin(), Limits(max_fix_iterations=50), observer=observe).run()
    assert res.status in ("Completed", "DivergenceSuspected")
    for (rule, before), (_, after) in zip(seen, seen[1:]):
        if rule.startswith(("FixInit", "FixIter", "FixTerm")):
            assert before.snapshot()[1] == after.snapshot()[1]


def test_make_policy():
    assert make_policy("random", 3) == SeededRandom(3)
    with pytest.raises(ValueError):
        make_policy("bogus")
