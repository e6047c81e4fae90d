"""Arrays: a memory function from addresses to values plus (start, size) instances."""

from __future__ import annotations

from ..engine.state import ExecState
from ..ir import Label, Value
from ._apply import apply_command


def alloc_array(state: ExecState, label: Label) -> ExecState:
    """Run ``label``'s head ``Arr``; faults with BadArraySize when the size is below 1."""
    return apply_command(state, label, ("ComArr",))


def read_array(state: ExecState, label: Label) -> ExecState:
    return apply_command(state, label, ("ComRdA",))


def write_array(state: ExecState, label: Label) -> ExecState:
    return apply_command(state, label, ("ComWrA", "ComWrASkip"))


def array_size(state: ExecState, label: Label) -> ExecState:
    return apply_command(state, label, ("ComAsize",))


def cells(state: ExecState, array: Label) -> list[Value]:
    arr = state.arrays[array]
    return [state.mem[a] for a in range(arr.start, arr.start + arr.size)]


def live_ranges(state: ExecState) -> list[tuple[int, int]]:
    """Allocated ``[start, end)`` address ranges, sorted."""
    return sorted((a.start, a.start + a.size) for a in state.arrays.values() if a.size)
