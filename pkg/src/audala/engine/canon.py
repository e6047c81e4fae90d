"""Canonical relabelling, so states can be compared modulo fresh labels.

Fresh labels are renumbered in first-visit order of a breadth-first walk that
starts at the null labels (sorted by struct name). Each visited instance
contributes its environment (parameters in declaration order, then locals by
name) and then its stack; arrays contribute their cells. Instances unreachable
from the null labels are visited afterwards, lowest structural signature
first. Array addresses are compacted in the same order.
"""

from __future__ import annotations

from collections import deque

from ..ir import Label
from .state import ArrayInstance, ExecState, Instance


def _values(state: ExecState, lab: Label):
    inst = state.structs.get(lab)
    if inst is not None:
        params = state.machine.params.get(inst.struct, ())
        for p in params:
            yield inst.env[p]
        for k in sorted(k for k in inst.env if k not in params):
            yield inst.env[k]
        yield from inst.stack
        return
    arr = state.arrays.get(lab)
    if arr is not None:
        for a in range(arr.start, arr.start + arr.size):
            yield state.mem[a]


def _order(state: ExecState) -> list[Label]:
    everything = set(state.structs) | set(state.arrays)
    roots = sorted((lab for lab in everything if lab.is_null), key=lambda l: l.null_of)
    seen: set[Label] = set()
    order: list[Label] = []

    def walk(start: Label) -> None:
        queue = deque([start])
        seen.add(start)
        while queue:
            lab = queue.popleft()
            order.append(lab)
            for v in _values(state, lab):
                if isinstance(v, Label) and v in everything and v not in seen:
                    seen.add(v)
                    queue.append(v)

    for r in roots:
        if r not in seen:
            walk(r)
    while len(seen) < len(everything):
        numbering = {lab: i for i, lab in enumerate(order)}
        rest = [lab for lab in everything if lab not in seen]
        rest.sort(key=lambda lab: (_signature(state, lab, numbering), lab.uid))
        walk(rest[0])
    return order


def _signature(state: ExecState, lab: Label, numbering: dict[Label, int]) -> str:
    def show(v) -> str:
        if isinstance(v, Label):
            if v.is_null:
                return repr(v)
            return f"@{numbering[v]}" if v in numbering else "?"
        return f"{type(v).__name__}:{v!r}"

    inst = state.structs.get(lab)
    kind = inst.struct if inst is not None else "[]"
    cmds = "" if inst is None else ";".join(str(c) for c in inst.cmds)
    return kind + "|" + ",".join(show(v) for v in _values(state, lab)) + "|" + cmds


def canonicalize(state: ExecState) -> ExecState:
    """A copy of ``state`` with fresh labels and addresses renumbered canonically."""
    order = _order(state)
    mapping: dict[Label, Label] = {}
    uid = 1
    for lab in order:
        if lab.is_null:
            mapping[lab] = lab
        else:
            mapping[lab] = Label(uid)
            uid += 1

    def m(v):
        return mapping.get(v, v) if isinstance(v, Label) else v

    out = ExecState(state.machine)
    out.schedule = state.schedule
    out.stab = state.stab[:]
    out.sf = state.sf[:]
    out.iters = state.iters[:]
    out.next_uid = uid
    out.warnings = state.warnings[:]
    addr = 1
    for lab in order:
        inst = state.structs.get(lab)
        if inst is not None:
            out.structs[mapping[lab]] = Instance(
                inst.struct,
                inst.cmds[:],
                [m(v) for v in inst.stack],
                {k: m(v) for k, v in inst.env.items()},
            )
            if inst.cmds:
                out.busy.add(mapping[lab])
            continue
        arr = state.arrays[lab]
        if lab.is_null:
            out.arrays[lab] = arr
            continue
        out.arrays[mapping[lab]] = ArrayInstance(addr, arr.size)
        for i in range(arr.size):
            out.mem[addr + i] = m(state.mem[arr.start + i])
        addr += arr.size
    out.next_addr = addr
    return out


def canonical_key(state: ExecState) -> tuple:
    """Hashable canonical form; equal keys mean equal states modulo labels."""
    return canonicalize(state).snapshot()
