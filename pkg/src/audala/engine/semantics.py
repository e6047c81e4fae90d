"""Transition rules.

Command rules act on one label's head command; schedule rules act on the
schedule head and (except ``IterIter``) need ``Done``. Shape premises (a label
on the stack for ``Rd``, a Boolean for ``If`` and so on) decide whether a
command is enabled. Value premises that a well-formed program can still break
at run time (division by zero, bad array size or index) raise
:class:`RuntimeFault` instead of leaving the run stuck.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .. import ir
from ..ir import NULL_ARRAY, Label, default_val
from ..syntax import ast as A
from .state import AFix, AIter, ArrayInstance, ExecState, Instance

_INT_MIN = -(1 << 63)
_INT_MAX = (1 << 63) - 1


class RuntimeFault(Exception):
    def __init__(self, kind: str, message: str, label: Optional[Label] = None):
        self.kind = kind
        self.label = label
        super().__init__(f"{kind}: {message}")


class IllegalTransition(Exception):
    """A transition was applied that is not enabled in the state."""


class CommandBlocked(Exception):
    """The head command's shape premises do not hold."""


@dataclass(frozen=True)
class Transition:
    """A descriptor: a command rule for ``label`` or a schedule rule."""

    rule: str
    label: Optional[Label] = None

    @property
    def is_command(self) -> bool:
        return self.label is not None


def _wrap(n: int) -> int:
    if _INT_MIN <= n <= _INT_MAX:
        return n
    return ((n - _INT_MIN) & ((1 << 64) - 1)) + _INT_MIN


def apply_op(op: str, a, b):
    if op == "+":
        return _wrap(a + b)
    if op == "-":
        return _wrap(a - b)
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    if op == "&&":
        return a and b
    if op == "||":
        return a or b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    if op == "*":
        return _wrap(a * b)
    if op in ("/", "%"):
        if b == 0:
            raise RuntimeFault("DivisionByZero", f"{a} {op} 0")
        q = abs(a) // abs(b)
        if (a < 0) != (b < 0):
            q = -q
        return _wrap(q) if op == "/" else _wrap(a - b * q)
    raise ValueError(f"unknown operator {op!r}")


# ---------------------------------------------------------------------------
# Command rules
# ---------------------------------------------------------------------------


def _blocked(inst: Instance, cmd) -> None:
    inst.cmds.append(cmd)
    raise CommandBlocked(str(cmd))


def exec_command(state: ExecState, label: Label) -> str:
    """Execute ``label``'s head command in place and return the rule name.

    Raises :class:`CommandBlocked` (state untouched) when a shape premise
    fails and :class:`RuntimeFault` on a value fault.
    """
    inst = state.structs[label]
    cmds = inst.cmds
    stack = inst.stack
    c = cmds.pop()
    code = c.code
    rule: str
    if code == ir.PUSH:
        stack.append(c.value)
        rule = "ComPush"
    elif code == ir.RD:
        if not stack or stack[-1] not in state.structs:
            _blocked(inst, c)
        target = stack.pop()
        tinst = state.structs[target]
        try:
            stack.append(tinst.env[c.var])
        except KeyError:
            stack.append(target)
            cmds.append(c)
            raise AssertionError(f"engine defect: {c.var!r} undefined on {target!r}") from None
        log = state.access_log
        if log is not None and c.var in state.machine.par[tinst.struct]:
            log.append((label, target, c.var, False))
        rule = "ComRd"
    elif code == ir.PUSH_THIS:
        stack.append(label)
        rule = "ComPushThis"
    elif code == ir.OP:
        if len(stack) < 2:
            _blocked(inst, c)
        b = stack.pop()
        a = stack.pop()
        try:
            stack.append(apply_op(c.op, a, b))
        except RuntimeFault as f:
            stack.append(a)
            stack.append(b)
            cmds.append(c)
            f.label = label
            raise
        rule = "ComOp"
    elif code == ir.IF:
        if not stack or not isinstance(stack[-1], bool):
            _blocked(inst, c)
        if stack.pop():
            cmds.extend(c.rev)
            rule = "ComIfT"
        else:
            rule = "ComIfF"
    elif code == ir.WR:
        rule = _write(state, label, inst, c)
    elif code == ir.NOT:
        if not stack or not isinstance(stack[-1], bool):
            _blocked(inst, c)
        stack.append(not stack.pop())
        rule = "ComNot"
    elif code == ir.CONS:
        n = c.arity
        if len(stack) < n:
            _blocked(inst, c)
        m = state.machine
        env = dict(m.env0[c.struct])
        if n:
            args = stack[-n:]
            del stack[-n:]
            for p, v in zip(m.params[c.struct], args):
                env[p] = v
        new = Label(state.next_uid)
        state.next_uid += 1
        state.structs[new] = Instance(c.struct, [], [], env)
        stack.append(new)
        stab = state.stab
        for k in range(len(stab)):
            stab[k] = False
        rule = "ComCons"
    elif code == ir.RDA:
        rule = _read_array(state, label, inst, c)
    elif code == ir.WRA:
        rule = _write_array(state, label, inst, c)
    elif code == ir.ARR:
        rule = _alloc_array(state, label, inst, c)
    elif code == ir.ASIZE:
        if not stack or stack[-1] not in state.arrays:
            _blocked(inst, c)
        stack.append(state.arrays[stack.pop()].size)
        rule = "ComAsize"
    else:
        cmds.append(c)
        raise AssertionError(f"unknown command {c!r}")
    if not cmds:
        state.busy.discard(label)
    return rule


def _write(state: ExecState, label: Label, inst: Instance, c) -> str:
    stack = inst.stack
    structs = state.structs
    if len(stack) < 2 or stack[-1] not in structs:
        _blocked(inst, c)
    target = stack.pop()
    v = stack.pop()
    m = state.machine
    tinst = structs[target]
    x = c.var
    is_par = x in m.par[tinst.struct]
    if is_par and target.uid == 0:
        # Writes to parameters of null instances are absorbed.
        state.last_write = None
        return "ComWrNSkip"
    env = tinst.env
    su = (not is_par) or (x in env and env[x] == v and type(env[x]) is type(v))
    env[x] = v
    if is_par:
        log = state.access_log
        if log is not None:
            log.append((label, target, x, True))
        state.last_write = (target, x, v, not su)
    else:
        state.last_write = None
    if not su:
        stab = state.stab
        if m.paramfix:
            key = (tinst.struct, x)
            for k, rel in enumerate(state.sf):
                if rel is None or key in rel:
                    stab[k] = False
        else:
            for k in range(len(stab)):
                stab[k] = False
    return "ComWrN" if m.paramfix else "ComWr"


def _alloc_array(state: ExecState, label: Label, inst: Instance, c) -> str:
    stack = inst.stack
    if not stack or isinstance(stack[-1], (bool, str, Label)):
        _blocked(inst, c)
    size = stack[-1]
    if size < 1:
        inst.cmds.append(c)
        raise RuntimeFault("BadArraySize", f"array({size})", label)
    stack.pop()
    start = state.next_addr
    state.next_addr += size
    fill = default_val(c.elem)
    mem = state.mem
    for a in range(start, start + size):
        mem[a] = fill
    new = Label(state.next_uid)
    state.next_uid += 1
    state.arrays[new] = ArrayInstance(start, size)
    stack.append(new)
    return "ComArr"


def _read_array(state: ExecState, label: Label, inst: Instance, c) -> str:
    stack = inst.stack
    if len(stack) < 2 or stack[-2] not in state.arrays or isinstance(stack[-1], (bool, str, Label)):
        _blocked(inst, c)
    index = stack[-1]
    arr_label = stack[-2]
    if arr_label == NULL_ARRAY:
        inst.cmds.append(c)
        raise RuntimeFault("NullArrayAccess", f"read of index {index} through the null array", label)
    arr = state.arrays[arr_label]
    if index < 0 or index >= arr.size:
        inst.cmds.append(c)
        raise RuntimeFault("IndexOutOfBounds", f"index {index} of array of size {arr.size}", label)
    del stack[-2:]
    stack.append(state.mem[arr.start + index])
    log = state.access_log
    if log is not None:
        log.append((label, arr_label, index, False))
    return "ComRdA"


def _write_array(state: ExecState, label: Label, inst: Instance, c) -> str:
    stack = inst.stack
    if (
        len(stack) < 3
        or stack[-2] not in state.arrays
        or isinstance(stack[-1], (bool, str, Label))
    ):
        _blocked(inst, c)
    index = stack[-1]
    arr_label = stack[-2]
    v = stack[-3]
    if arr_label == NULL_ARRAY:
        if state.machine.strict_null_array:
            inst.cmds.append(c)
            raise RuntimeFault("NullArrayAccess", f"write of index {index} through the null array", label)
        del stack[-3:]
        state.warnings.append(f"{label!r}: write through the null array skipped")
        state.last_write = None
        return "ComWrASkip"
    arr = state.arrays[arr_label]
    if index < 0 or index >= arr.size:
        inst.cmds.append(c)
        raise RuntimeFault("IndexOutOfBounds", f"index {index} of array of size {arr.size}", label)
    del stack[-3:]
    addr = arr.start + index
    old = state.mem[addr]
    su = old == v and type(old) is type(v)
    state.mem[addr] = v
    log = state.access_log
    if log is not None:
        log.append((label, arr_label, index, True))
    state.last_write = (arr_label, index, v, not su)
    if not su:
        # Every cell counts as a parameter relevant at every level.
        stab = state.stab
        for k in range(len(stab)):
            stab[k] = False
    return "ComWrA"


def command_enabled(state: ExecState, label: Label) -> bool:
    inst = state.structs.get(label)
    if inst is None or not inst.cmds:
        return False
    c = inst.cmds[-1]
    stack = inst.stack
    code = c.code
    if code in (ir.PUSH, ir.PUSH_THIS):
        return True
    if code == ir.RD:
        return bool(stack) and stack[-1] in state.structs
    if code == ir.WR:
        return len(stack) >= 2 and stack[-1] in state.structs
    if code in (ir.IF, ir.NOT):
        return bool(stack) and isinstance(stack[-1], bool)
    if code == ir.OP:
        return len(stack) >= 2
    if code == ir.CONS:
        return len(stack) >= c.arity
    if code == ir.ASIZE:
        return bool(stack) and stack[-1] in state.arrays
    if code == ir.ARR:
        return bool(stack) and isinstance(stack[-1], int) and not isinstance(stack[-1], bool)
    if code == ir.RDA:
        return len(stack) >= 2 and stack[-2] in state.arrays and _is_int(stack[-1])
    if code == ir.WRA:
        return len(stack) >= 3 and stack[-2] in state.arrays and _is_int(stack[-1])
    return False


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


_CMD_RULES = {
    ir.PUSH: "ComPush", ir.PUSH_THIS: "ComPushThis", ir.RD: "ComRd", ir.NOT: "ComNot",
    ir.OP: "ComOp", ir.CONS: "ComCons", ir.RDA: "ComRdA", ir.ARR: "ComArr", ir.ASIZE: "ComAsize",
}


def command_rule(state: ExecState, label: Label) -> str:
    """The name of the rule the head command of ``label`` would fire."""
    inst = state.structs[label]
    c = inst.cmds[-1]
    if c.code == ir.IF:
        return "ComIfT" if inst.stack[-1] else "ComIfF"
    if c.code == ir.WR:
        target = inst.stack[-1]
        skip = target.uid == 0 and c.var in state.machine.par[state.structs[target].struct]
        if skip:
            return "ComWrNSkip"
        return "ComWrN" if state.machine.paramfix else "ComWr"
    if c.code == ir.WRA:
        return "ComWrASkip" if inst.stack[-2] == NULL_ARRAY else "ComWrA"
    return _CMD_RULES[c.code]


# ---------------------------------------------------------------------------
# Schedule rules
# ---------------------------------------------------------------------------


def iter_iter_enabled(state: ExecState) -> bool:
    sched = state.schedule
    if not sched or not isinstance(sched[0], AIter) or state.stab[-1]:
        return False
    m = state.machine
    steps = sched[0].steps
    busy = state.busy
    for lab, inst in state.structs.items():
        if lab not in busy and m.iter_block_rev(inst.struct, steps):
            return True
    return False


def schedule_rule(state: ExecState) -> Optional[str]:
    """The schedule rule enabled in ``state``, if any."""
    sched = state.schedule
    if not sched:
        return None
    head = sched[0]
    if isinstance(head, AIter):
        if iter_iter_enabled(state):
            return "IterIter"
        if state.busy or not state.stab[-1]:
            return None
        return "IterTerm"
    if state.busy:
        return None
    pf = state.machine.paramfix
    if isinstance(head, A.Call):
        return "InitG" if head.struct is None else "InitL"
    if isinstance(head, A.Fix):
        if not pf:
            return "FixInit"
        return "FixInitG" if head.params is None else "FixInitS"
    if isinstance(head, A.Iter):
        return "IterInit"
    if isinstance(head, AFix):
        if state.stab[-1]:
            return "FixTermN" if pf else "FixTerm"
        return "FixIterN" if pf else "FixIter"
    raise AssertionError(f"unknown schedule entry {head!r}")


def exec_schedule(state: ExecState, rule: str) -> Optional[list[Label]]:
    """Apply schedule rule ``rule`` in place.

    Returns the labels that received commands for Init/IterIter rules.
    """
    sched = state.schedule
    head = sched[0]
    rest = sched[1:]
    m = state.machine
    if rule in ("InitG", "InitL"):
        loaded = []
        target = head.struct
        busy = state.busy
        for lab, inst in state.structs.items():
            if target is not None and inst.struct != target:
                continue
            block = m.blocks_rev.get((inst.struct, head.step), ())
            inst.cmds = list(block)
            inst.stack = []
            if block:
                busy.add(lab)
                loaded.append(lab)
            else:
                busy.discard(lab)
        state.schedule = rest
        return loaded
    if rule in ("FixInit", "FixInitG", "FixInitS"):
        state.schedule = tuple(head.body) + (AFix(tuple(head.body), head.params),) + rest
        state.stab.append(True)
        state.sf.append(None if head.params is None else m.fixon_pairs(head.params))
        state.iters.append(1)
        return None
    if rule in ("FixIter", "FixIterN"):
        state.schedule = head.body + sched
        state.stab[-1] = True
        state.iters[-1] += 1
        return None
    if rule in ("FixTerm", "FixTermN", "IterTerm"):
        state.stab.pop()
        state.sf.pop()
        state.iters.pop()
        state.schedule = rest
        return None
    if rule == "IterInit":
        steps = head.steps
        loaded = []
        for lab, inst in state.structs.items():
            block = m.iter_block_rev(inst.struct, steps)
            inst.cmds = list(block)
            inst.stack = []
            if block:
                state.busy.add(lab)
                loaded.append(lab)
        state.stab.append(True)
        state.sf.append(None)
        state.iters.append(1)
        state.schedule = (AIter(steps),) + rest
        return loaded
    if rule == "IterIter":
        steps = head.steps
        loaded = []
        for lab, inst in state.structs.items():
            block = m.iter_block_rev(inst.struct, steps)
            if not block:
                continue
            cmds = inst.cmds
            n = len(block)
            # Skip instances whose list already ends with the block.
            if len(cmds) >= n and tuple(cmds[:n]) == block:
                continue
            cmds[0:0] = block
            state.busy.add(lab)
            loaded.append(lab)
        state.stab[-1] = True
        state.iters[-1] += 1
        return loaded
    raise IllegalTransition(rule)


# ---------------------------------------------------------------------------
# Pure interface
# ---------------------------------------------------------------------------


def enabled_transitions(state: ExecState) -> list[Transition]:
    """Every enabled transition, command rules first in label order."""
    out = [
        Transition(command_rule(state, lab), lab)
        for lab in sorted(state.busy)
        if command_enabled(state, lab)
    ]
    rule = schedule_rule(state)
    if rule is not None:
        out.append(Transition(rule))
    return out


def apply_transition(state: ExecState, t: Transition, in_place: bool = False) -> ExecState:
    """Apply ``t``; by default the input state is left untouched."""
    if t.label is not None:
        if not command_enabled(state, t.label) or command_rule(state, t.label) != t.rule:
            raise IllegalTransition(f"{t.rule} for {t.label!r} is not enabled")
        s = state if in_place else state.copy()
        exec_command(s, t.label)
        return s
    if schedule_rule(state) != t.rule:
        raise IllegalTransition(f"{t.rule} is not enabled")
    s = state if in_place else state.copy()
    exec_schedule(s, t.rule)
    return s
